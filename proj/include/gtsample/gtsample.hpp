#pragma once

#define GTSAMPLE_VERSION "0.1.0"

#include "gtsample/bounds.hpp"
#include "gtsample/combinatorics.hpp"
#include "gtsample/error.hpp"
#include "gtsample/harness.hpp"
#include "gtsample/oracle.hpp"
#include "gtsample/rc.hpp"
#include "gtsample/rng.hpp"
#include "gtsample/run_result.hpp"
#include "gtsample/sight.hpp"
#include "gtsample/stats.hpp"
