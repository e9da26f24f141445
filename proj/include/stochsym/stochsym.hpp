#pragma once

#include "stochsym/error.hpp"
#include "stochsym/numeric.hpp"
#include "stochsym/expr.hpp"
#include "stochsym/ito.hpp"
#include "stochsym/symmetry_ito.hpp"
#include "stochsym/kozlov.hpp"
#include "stochsym/fokker_planck.hpp"
#include "stochsym/fp_symmetry.hpp"
#include "stochsym/weber.hpp"
#include "stochsym/montecarlo.hpp"
#include "stochsym/equation_io.hpp"
