#ifndef CryptoAuth_H
#define CryptoAuth_H

<?js link "crypto/Key.h" ?>
<$js link "memory/Allocator.h" $>

struct CryptoAuth;
struct CryptoAuth* CryptoAuth_new(struct Allocator* alloc, struct Key* key);

#endif
