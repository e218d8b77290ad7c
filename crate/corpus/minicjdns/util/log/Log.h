#ifndef Log_H
#define Log_H

struct Log;
void Log_debug(struct Log* log, const char* msg);
void Log_warn(struct Log* log, const char* msg);

#endif
