#ifndef Address_H
#define Address_H

<?js link "crypto/Key.h" ?>

struct Address { unsigned char ip6[16]; unsigned long long path; };
int Address_xorcmp(unsigned target, struct Address* a, struct Address* b);

#endif
