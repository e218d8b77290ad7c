<?js link "dht/Address.h" ?>
<$js link "util/Bits.h" $>

int Address_xorcmp(unsigned target, struct Address* a, struct Address* b)
{
    unsigned x = ((unsigned*)a->ip6)[0] ^ target;
    unsigned y = ((unsigned*)b->ip6)[0] ^ target;
    return (x > y) - (x < y);
}
