#ifndef Key_H
#define Key_H

<?js link "util/Hex.h" ?>

struct Key { unsigned char bytes[32]; };
int Key_parse(struct Key* out, const char* text);

#endif
