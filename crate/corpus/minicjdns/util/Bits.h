#ifndef Bits_H
#define Bits_H

static inline unsigned Bits_popcount(unsigned x)
{
    unsigned n = 0;
    for (; x; x &= x - 1) { n++; }
    return n;
}

#endif
