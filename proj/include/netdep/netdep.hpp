#pragma once

// Umbrella header for the netdep library: network construction, transmission
// process simulators, adjacency-based covariance models, the spectral linear
// mixed model, the network autocorrelation model, association tests, and the
// rejection-rate harness.

#include "netdep/assoc.hpp"
#include "netdep/covariance.hpp"
#include "netdep/errors.hpp"
#include "netdep/graph.hpp"
#include "netdep/io.hpp"
#include "netdep/lmm.hpp"
#include "netdep/nam.hpp"
#include "netdep/optim.hpp"
#include "netdep/rng.hpp"
#include "netdep/simharness.hpp"
#include "netdep/transmission.hpp"
