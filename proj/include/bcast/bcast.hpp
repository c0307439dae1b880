#pragma once

#include "bcast/belief.hpp"
#include "bcast/errors.hpp"
#include "bcast/evaluate.hpp"
#include "bcast/executable.hpp"
#include "bcast/filter_check.hpp"
#include "bcast/history.hpp"
#include "bcast/model.hpp"
#include "bcast/oracle.hpp"
#include "bcast/random.hpp"
#include "bcast/report.hpp"
#include "bcast/runner.hpp"
#include "bcast/scalar.hpp"
#include "bcast/search.hpp"
#include "bcast/strategy.hpp"
#include "bcast/strategy_io.hpp"
#include "bcast/trajectory.hpp"
