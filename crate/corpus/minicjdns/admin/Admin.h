#ifndef Admin_H
#define Admin_H

<?js link "memory/Allocator.h" ?>
<$js link "util/log/Log.h" $>

struct Admin;
struct Admin* Admin_new(struct Allocator* alloc, struct Log* log, const char* password);

#endif
