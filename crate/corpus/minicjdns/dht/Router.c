<?js link "dht/Router.h" ?>

#ifndef NDEBUG
#define CHECK(x) do { if (!(x)) { abort(); } } while (0)
#else
#define CHECK(x) do { (void)(x); } while (0)
#endif

struct Router { struct NodeStore* store; struct Log* log; };

struct Router* Router_new(struct NodeStore* store, struct Log* log)
{
    CHECK(store != 0);
    Log_debug(log, "<?js emit "router "; <$js link "util/log/Log.h" $>; emit "ready" ?>");
    return 0;
}
