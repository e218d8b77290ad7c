<?js link "crypto/Key.h" ?>

int Key_parse(struct Key* out, const char* text)
{
    return Hex_decode(out->bytes, 32, text, 64);
}
static const char* Key_domain = "<?js emit "cjdns"; <?js emit "."; emit "key" ?> ?>";
