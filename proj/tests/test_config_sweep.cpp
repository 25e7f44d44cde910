#include <doctest.h>

TEST_SUITE("config_sweep") {

}  // TEST_SUITE
