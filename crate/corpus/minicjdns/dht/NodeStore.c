<?js link "dht/NodeStore.h" ?>
<$js link "memory/Allocator.h" $>

struct NodeStore { struct Log* log; int size; };

struct NodeStore* NodeStore_new(struct Allocator* alloc, struct Log* log)
{
    struct NodeStore* ns = Allocator_malloc(alloc, sizeof(struct NodeStore));
    ns->log = log;
    ns->size = <?js define CAPACITY "128"; use CAPACITY ?>;
    Log_debug(log, "nodestore up");
    return ns;
}
