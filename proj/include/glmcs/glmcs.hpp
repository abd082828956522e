#pragma once
// Umbrella header.

#include "glmcs/conf_sets.hpp"
#include "glmcs/estimators.hpp"
#include "glmcs/glm_family.hpp"
#include "glmcs/info_gain.hpp"
#include "glmcs/observation_log.hpp"
#include "glmcs/philox_rng.hpp"
#include "glmcs/posterior.hpp"
#include "glmcs/scenario.hpp"
#include "glmcs/simulate.hpp"
