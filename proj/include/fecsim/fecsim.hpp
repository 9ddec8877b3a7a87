#pragma once

#include "fecsim/config.hpp"
#include "fecsim/core.hpp"
#include "fecsim/engine.hpp"
#include "fecsim/oracles.hpp"
#include "fecsim/policies.hpp"
#include "fecsim/rng.hpp"
#include "fecsim/runner.hpp"
#include "fecsim/scenarios.hpp"
#include "fecsim/service_models.hpp"
#include "fecsim/stats.hpp"
#include "fecsim/traces.hpp"
#include "fecsim/verification.hpp"
