#ifndef Router_H
#define Router_H

<?js link "dht/NodeStore.h" ?>

struct Router;
struct Router* Router_new(struct NodeStore* store, struct Log* log);

#endif
