<?js link "admin/Admin.h" ?>
<$js link "crypto/CryptoAuth.h" $>
<?js link "net/Ducttape.h" ?>
<?js link "interface/UDPInterface.h"; link "interface/ETHInterface.h" ?>
<$js link "util/Build.h" $>

/* <?js emit "minicjdns"; <?js link "dht/Router.h" ?>; emit " core" ?> */
static const char* main_instance = "<?js constant INSTANCE ?>";

int main(int argc, char** argv)
{
    (void)argc;
    (void)argv;
    Log_debug(0, "<?js define GREETING "starting"; use GREETING ?>");
    return 0;
}
