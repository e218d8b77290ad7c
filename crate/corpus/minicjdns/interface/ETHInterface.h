#ifndef ETHInterface_H
#define ETHInterface_H

<?js link "interface/Interface.h" ?>

struct ETHInterface;
struct ETHInterface* ETHInterface_new(struct Allocator* alloc, const char* dev);

#endif
