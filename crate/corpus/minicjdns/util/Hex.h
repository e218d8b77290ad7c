#ifndef Hex_H
#define Hex_H

<?js link "util/Bits.h" ?>

int Hex_encode(char* out, int outLen, const unsigned char* in, int inLen);
int Hex_decode(unsigned char* out, int outLen, const char* in, int inLen);

#endif
