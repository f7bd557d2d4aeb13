#pragma once

#include "rpkf/adapters.hpp"
#include "rpkf/filter_core.hpp"
#include "rpkf/linalg.hpp"
#include "rpkf/random_matrix.hpp"
#include "rpkf/sim_harness.hpp"
