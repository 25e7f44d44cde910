#include <doctest.h>

TEST_SUITE("qrt") {

}  // TEST_SUITE
