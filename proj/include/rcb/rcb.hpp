#pragma once

#include "rcb/array_model.hpp"
#include "rcb/beamformers.hpp"
#include "rcb/covariance.hpp"
#include "rcb/experiment.hpp"
#include "rcb/io.hpp"
#include "rcb/metrics.hpp"
#include "rcb/oracles.hpp"
#include "rcb/rng.hpp"
#include "rcb/types.hpp"
