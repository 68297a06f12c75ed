#pragma once

#include "bfm/data_io.hpp"
#include "bfm/dataset.hpp"
#include "bfm/distribution.hpp"
#include "bfm/error.hpp"
#include "bfm/hazard_model.hpp"
#include "bfm/hmc.hpp"
#include "bfm/mle.hpp"
#include "bfm/model_eval.hpp"
#include "bfm/models.hpp"
#include "bfm/numerics.hpp"
#include "bfm/optimize.hpp"
#include "bfm/parallel.hpp"
#include "bfm/reliability.hpp"
#include "bfm/risk.hpp"
#include "bfm/rng.hpp"
