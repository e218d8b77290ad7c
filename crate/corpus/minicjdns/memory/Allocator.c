<?js link "memory/Allocator.h" ?>
<$js link "util/Bits.h" $>

struct Allocator { unsigned long used; };

void* Allocator_malloc(struct Allocator* alloc, unsigned long size)
{
    alloc->used += size;
    return 0;
}

void Allocator_free(struct Allocator* alloc)
{
    alloc->used = 0;
}
