#ifndef Build_H
#define Build_H

extern const char* Build_flavor;
extern const char* Build_id;

#endif
