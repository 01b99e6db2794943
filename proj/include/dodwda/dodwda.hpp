#pragma once

#include "dodwda/demand_response.hpp"
#include "dodwda/errors.hpp"
#include "dodwda/oco.hpp"
#include "dodwda/regret.hpp"
#include "dodwda/rng.hpp"
#include "dodwda/scenario.hpp"
#include "dodwda/svg_plot.hpp"
#include "dodwda/topology.hpp"
#include "dodwda/trace_io.hpp"
