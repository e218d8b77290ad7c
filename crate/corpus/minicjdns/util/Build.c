<?js link "util/Build.h" ?>

<?js define BUILD_FLAVOR "release" ?>
const char* Build_flavor = "<?js use BUILD_FLAVOR ?>";
const char* Build_id = "<?js constant BUILD_ID ?>";
