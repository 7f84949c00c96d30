#include <catch2/catch_amalgamated.hpp>
#include "rachsim/rachsim.hpp"
