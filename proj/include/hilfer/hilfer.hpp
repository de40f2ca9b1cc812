#pragma once

#include "hilfer/error.hpp"
#include "hilfer/special_fn.hpp"
#include "hilfer/psi_frame.hpp"
#include "hilfer/frac_ops.hpp"
#include "hilfer/problem.hpp"
#include "hilfer/solver.hpp"
#include "hilfer/stability.hpp"
#include "hilfer/expression.hpp"
