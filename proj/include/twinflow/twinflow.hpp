#pragma once

// Umbrella header for the digital-twin edge-network simulator.

#include "twinflow/accuracy.hpp"
#include "twinflow/agent.hpp"
#include "twinflow/bnb.hpp"
#include "twinflow/channel.hpp"
#include "twinflow/config.hpp"
#include "twinflow/delay.hpp"
#include "twinflow/distribution.hpp"
#include "twinflow/errors.hpp"
#include "twinflow/io.hpp"
#include "twinflow/lp.hpp"
#include "twinflow/metrics.hpp"
#include "twinflow/mlp.hpp"
#include "twinflow/mobility.hpp"
#include "twinflow/oracle.hpp"
#include "twinflow/orchestrator.hpp"
#include "twinflow/planner.hpp"
#include "twinflow/replay.hpp"
#include "twinflow/rng.hpp"
#include "twinflow/simulation.hpp"
#include "twinflow/state.hpp"
#include "twinflow/twin.hpp"
