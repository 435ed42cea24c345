#pragma once

// Umbrella header: simulation of iterated random walks in random scenery,
// their continuum limits, and the statistical gates used to verify them.

#include "csv.hpp"
#include "exact.hpp"
#include "experiment.hpp"
#include "limits.hpp"
#include "parallel.hpp"
#include "rational.hpp"
#include "rng.hpp"
#include "scenery.hpp"
#include "stats.hpp"
#include "verify.hpp"
#include "version.hpp"
#include "walks.hpp"
