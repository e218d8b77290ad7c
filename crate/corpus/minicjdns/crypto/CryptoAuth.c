<?js link "crypto/CryptoAuth.h" ?>
<$js link "util/log/Log.h" $>

struct CryptoAuth { struct Key key; unsigned nonce; };
static const char* CryptoAuth_session = "<?js constant SESSION_SALT ?>";

struct CryptoAuth* CryptoAuth_new(struct Allocator* alloc, struct Key* key)
{
    struct CryptoAuth* ca = Allocator_malloc(alloc, sizeof(struct CryptoAuth));
    ca->key = *key;
    ca->nonce = <?js define NONCE_START "1"; use NONCE_START ?>;
    return ca;
}
