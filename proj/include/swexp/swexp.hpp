#pragma once

#include "swexp/binning_sim.hpp"
#include "swexp/csv.hpp"
#include "swexp/error.hpp"
#include "swexp/excess_rate.hpp"
#include "swexp/grid_oracle.hpp"
#include "swexp/mappings.hpp"
#include "swexp/parallel.hpp"
#include "swexp/prob.hpp"
#include "swexp/rate_functions.hpp"
#include "swexp/root_finding.hpp"
#include "swexp/solvers.hpp"
#include "swexp/source_json.hpp"
