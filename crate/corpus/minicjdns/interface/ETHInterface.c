<?js link "interface/ETHInterface.h" ?>
<$js link "memory/Allocator.h" $>

struct ETHInterface { struct Interface generic; int sock; };
static const unsigned short ETHInterface_ethertype = <?js emit "0xfc00" ?>;

struct ETHInterface* ETHInterface_new(struct Allocator* alloc, const char* dev)
{
    (void)dev;
    return Allocator_malloc(alloc, sizeof(struct ETHInterface));
}
