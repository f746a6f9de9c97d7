#pragma once

#include "catalog.hpp"
#include "config.hpp"
#include "counterexample.hpp"
#include "domain.hpp"
#include "error.hpp"
#include "grid.hpp"
#include "inputs.hpp"
#include "kernel.hpp"
#include "korn.hpp"
#include "lipschitz.hpp"
#include "norms.hpp"
#include "numerics.hpp"
#include "parallel.hpp"
#include "quadrature.hpp"
#include "solver.hpp"
#include "sweep.hpp"
#include "vec.hpp"
