#pragma once

#include <survkit/benchmark.hpp>
#include <survkit/compose.hpp>
#include <survkit/coxph.hpp>
#include <survkit/csv.hpp>
#include <survkit/distribution.hpp>
#include <survkit/errors.hpp>
#include <survkit/learners.hpp>
#include <survkit/measures.hpp>
#include <survkit/model.hpp>
#include <survkit/nonparametric.hpp>
#include <survkit/pipeline.hpp>
#include <survkit/prediction.hpp>
#include <survkit/resample.hpp>
#include <survkit/rng.hpp>
#include <survkit/serialize.hpp>
#include <survkit/simulate.hpp>
#include <survkit/task.hpp>
#include <survkit/tune.hpp>
#include <survkit/weibull_aft.hpp>
