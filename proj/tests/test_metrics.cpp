#include "test_support.hpp"
#include <catch2/catch_amalgamated.hpp>
