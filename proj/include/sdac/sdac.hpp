#pragma once

#include "sdac/backend.hpp"
#include "sdac/benchmarks.hpp"
#include "sdac/collect.hpp"
#include "sdac/config.hpp"
#include "sdac/cuber.hpp"
#include "sdac/error.hpp"
#include "sdac/external.hpp"
#include "sdac/formula.hpp"
#include "sdac/mini_cdcl.hpp"
#include "sdac/orchestrate.hpp"
#include "sdac/outcome.hpp"
#include "sdac/parallel.hpp"
#include "sdac/strategy.hpp"
#include "sdac/tune.hpp"
#include "sdac/validate.hpp"
