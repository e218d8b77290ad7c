<?js link "interface/UDPInterface.h" ?>

struct UDPInterface { struct Interface generic; int fd; };
static const char* UDPInterface_default = "<?js define DEFAULT_BIND "0.0.0.0:0"; use DEFAULT_BIND ?>";

struct UDPInterface* UDPInterface_new(struct Allocator* alloc, const char* bind)
{
    (void)bind;
    return Allocator_malloc(alloc, sizeof(struct UDPInterface));
}
