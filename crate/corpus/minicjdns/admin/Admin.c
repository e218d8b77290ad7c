<?js link "admin/Admin.h" ?>
<$js link "util/Build.h" $>

struct Admin { struct Log* log; const char* password; };

struct Admin* Admin_new(struct Allocator* alloc, struct Log* log, const char* password)
{
    struct Admin* admin = Allocator_malloc(alloc, sizeof(struct Admin));
    admin->log = log;
    admin->password = password;
    Log_debug(log, "<?js emit "admin"; emit " listening" ?>");
    return admin;
}
static const char* Admin_cookie = "<?js constant ADMIN_COOKIE ?>";
