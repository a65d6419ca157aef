#pragma once

#include "aoi/approx.hpp"
#include "aoi/json_io.hpp"
#include "aoi/oracle.hpp"
#include "aoi/penalty.hpp"
#include "aoi/policies.hpp"
#include "aoi/rng.hpp"
#include "aoi/rvi.hpp"
#include "aoi/service.hpp"
#include "aoi/sim.hpp"
#include "aoi/state.hpp"
#include "aoi/state_space.hpp"
#include "aoi/sweep.hpp"
