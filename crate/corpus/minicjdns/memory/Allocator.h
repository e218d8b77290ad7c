#ifndef Allocator_H
#define Allocator_H

struct Allocator;
void* Allocator_malloc(struct Allocator* alloc, unsigned long size);
void Allocator_free(struct Allocator* alloc);

#endif
