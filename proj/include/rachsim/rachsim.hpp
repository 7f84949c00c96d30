#pragma once

// Umbrella header for the rachsim library.

#include "rachsim/analytic.hpp"
#include "rachsim/cobalt.hpp"
#include "rachsim/energy.hpp"
#include "rachsim/errors.hpp"
#include "rachsim/events.hpp"
#include "rachsim/metrics.hpp"
#include "rachsim/prach.hpp"
#include "rachsim/report_io.hpp"
#include "rachsim/rng.hpp"
#include "rachsim/scenario.hpp"
#include "rachsim/simulator.hpp"
#include "rachsim/strings.hpp"
#include "rachsim/sweep.hpp"
#include "rachsim/time.hpp"
#include "rachsim/traffic.hpp"
