#pragma once
// Everything at once.

#include "masslab/errors.hpp"
#include "masslab/equation.hpp"
#include "masslab/regimes.hpp"
#include "masslab/closed_forms.hpp"
#include "masslab/grid_solver.hpp"
#include "masslab/fractional.hpp"
#include "masslab/diagnostics.hpp"
#include "masslab/limits.hpp"
#include "masslab/io.hpp"
#include "masslab/config.hpp"
#include "masslab/experiment.hpp"
#include "masslab/acceptance.hpp"
