#pragma once

#include "holo/core.hpp"
#include "holo/test_functions.hpp"
#include "holo/measure.hpp"
#include "holo/lagrangian.hpp"
#include "holo/dynamics.hpp"
#include "holo/closed_velocity.hpp"
#include "holo/variations.hpp"
#include "holo/simplex.hpp"
#include "holo/action_lp.hpp"
#include "holo/scenarios.hpp"
