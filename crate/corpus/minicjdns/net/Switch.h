#ifndef Switch_H
#define Switch_H

<?js link "interface/Interface.h" ?>

struct Switch;
int Switch_route(struct Switch* sw, unsigned long long label);

#endif
