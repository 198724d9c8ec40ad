#pragma once

// Umbrella header for the estimation library. The CLI front end lives in
// qest/harness.hpp and is not pulled in here.

#include "qest/analytics.hpp"
#include "qest/ensemble.hpp"
#include "qest/errors.hpp"
#include "qest/linalg.hpp"
#include "qest/protocol.hpp"
#include "qest/qubit.hpp"
#include "qest/rng.hpp"
#include "qest/trace.hpp"
