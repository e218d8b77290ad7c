<?js link "net/Switch.h" ?>
<$js link "util/Bits.h" $>

#ifndef NDEBUG
#define CHECK(x) do { if (!(x)) { abort(); } } while (0)
#else
#define CHECK(x) do { (void)(x); } while (0)
#endif

struct Switch { int ifaceCount; };

int Switch_route(struct Switch* sw, unsigned long long label)
{
    CHECK(sw->ifaceCount > 0);
    return (int)(label & <?js define LABEL_MASK "0xf"; use LABEL_MASK ?>);
}
