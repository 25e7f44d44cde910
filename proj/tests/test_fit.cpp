#include <doctest.h>

TEST_SUITE("fit") {

}  // TEST_SUITE
