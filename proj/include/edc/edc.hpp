#pragma once

#include "edc/analytic.hpp"
#include "edc/bench.hpp"
#include "edc/bench_parser.hpp"
#include "edc/bench_topology.hpp"
#include "edc/error.hpp"
#include "edc/experiment.hpp"
#include "edc/measurement.hpp"
#include "edc/mode.hpp"
#include "edc/optics.hpp"
#include "edc/report.hpp"
#include "edc/validation.hpp"
#include "edc/wave.hpp"
