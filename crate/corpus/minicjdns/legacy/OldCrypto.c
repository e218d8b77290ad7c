<?js link "crypto/Key.h" ?>

static int OldCrypto_rounds = <?js define ROUNDS "10"; use ROUNDS ?>;
