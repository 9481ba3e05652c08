// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "beamforming.hpp"
#include "channel.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "estimator.hpp"
#include "experiments.hpp"
#include "fim.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"
#include "scenario.hpp"
