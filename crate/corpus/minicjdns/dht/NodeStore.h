#ifndef NodeStore_H
#define NodeStore_H

<?js link "dht/Address.h" ?>
<$js link "util/log/Log.h" $>

struct NodeStore;
struct NodeStore* NodeStore_new(struct Allocator* alloc, struct Log* log);

#endif
