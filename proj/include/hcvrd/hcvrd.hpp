#pragma once

#include "checks.hpp"
#include "equilibria.hpp"
#include "errors.hpp"
#include "format.hpp"
#include "lyapunov.hpp"
#include "model.hpp"
#include "params.hpp"
#include "scenario.hpp"
#include "solver.hpp"
#include "stability.hpp"
