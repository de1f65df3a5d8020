#pragma once

// Umbrella header: rank-based estimation of the quantile dependence
// function, the derived independence tests, their Monte-Carlo calibration,
// benchmark model samplers and a simulation power harness.

#include "qdep/calibration.hpp"
#include "qdep/copula_grid.hpp"
#include "qdep/errors.hpp"
#include "qdep/io.hpp"
#include "qdep/models.hpp"
#include "qdep/parallel.hpp"
#include "qdep/power.hpp"
#include "qdep/ranks.hpp"
#include "qdep/rng.hpp"
#include "qdep/stats.hpp"
