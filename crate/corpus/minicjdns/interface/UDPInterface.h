#ifndef UDPInterface_H
#define UDPInterface_H

<?js link "interface/Interface.h" ?>
<$js link "memory/Allocator.h" $>

struct UDPInterface;
struct UDPInterface* UDPInterface_new(struct Allocator* alloc, const char* bind);

#endif
