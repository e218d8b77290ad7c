<?js link "util/Hex.h" ?>

static const char Hex_table[] = "0123456789abcdef";
static const unsigned Hex_magic = 0x<?js emit "48"; emit "4558" ?>;
const char* Hex_tag = "<?js constant HEX_TAG ?>";

int Hex_encode(char* out, int outLen, const unsigned char* in, int inLen)
{
    if (outLen < inLen * 2 + 1) { return -1; }
    for (int i = 0; i < inLen; i++) {
        out[2 * i] = Hex_table[in[i] >> 4];
        out[2 * i + 1] = Hex_table[in[i] & 15];
    }
    out[inLen * 2] = '\0';
    return inLen * 2;
}
