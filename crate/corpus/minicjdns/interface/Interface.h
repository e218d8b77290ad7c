#ifndef Interface_H
#define Interface_H

struct Interface {
    int (*send)(struct Interface* iface, const unsigned char* msg, int len);
    void* context;
};

#endif
