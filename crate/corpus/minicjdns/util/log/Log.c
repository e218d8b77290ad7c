<?js link "util/log/Log.h" ?>

struct Log { int level; };

void Log_debug(struct Log* log, const char* msg)
{
    if (log->level <= <?js define LEVEL_DEBUG "0"; use LEVEL_DEBUG ?>) { (void)msg; }
}

void Log_warn(struct Log* log, const char* msg)
{
    if (log->level <= <?js define LEVEL_WARN "2"; use LEVEL_WARN ?>) { (void)msg; }
}
