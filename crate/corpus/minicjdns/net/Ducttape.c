<?js link "net/Ducttape.h" ?>
<$js link "util/log/Log.h" $>

#ifndef NDEBUG
#define CHECK(x) do { if (!(x)) { abort(); } } while (0)
#else
#define CHECK(x) do { (void)(x); } while (0)
#endif

struct Ducttape { struct Switch* sw; struct Router* router; };
static const char* Ducttape_id = "<?js constant DUCTTAPE_ID ?>";

struct Ducttape* Ducttape_new(struct Switch* sw, struct Router* router)
{
    CHECK(sw != 0 && router != 0);
    return 0;
}
