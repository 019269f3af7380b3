#pragma once

// Umbrella header.

#include "config.hpp"
#include "controllers.hpp"
#include "dqn.hpp"
#include "episode.hpp"
#include "harness.hpp"
#include "qnet.hpp"
#include "sim.hpp"
#include "stats.hpp"
