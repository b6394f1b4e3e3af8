#pragma once

// Umbrella header for the library (the JSON scenario runner is separate:
// coherent/scenario.hpp).

#include "coherent/error.hpp"
#include "coherent/simplex.hpp"
#include "coherent/random.hpp"
#include "coherent/report.hpp"
#include "coherent/distortion.hpp"
#include "coherent/signal_models.hpp"
#include "coherent/gs_joint.hpp"
#include "coherent/econ.hpp"
#include "coherent/dynamics.hpp"
#include "coherent/curve.hpp"
