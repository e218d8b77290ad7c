#ifndef Ducttape_H
#define Ducttape_H

<?js link "net/Switch.h" ?>
<$js link "dht/Router.h" $>

struct Ducttape;
struct Ducttape* Ducttape_new(struct Switch* sw, struct Router* router);

#endif
