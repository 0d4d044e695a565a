// Copyright 2026 The divlab Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "divlab/consistency_lab.hpp"
#include "divlab/divergence_engine.hpp"
#include "divlab/error.hpp"
#include "divlab/extended_real.hpp"
#include "divlab/json_io.hpp"
#include "divlab/loss_library.hpp"
#include "divlab/optimize.hpp"
#include "divlab/prob_core.hpp"
#include "divlab/risk_engine.hpp"
#include "divlab/sampler.hpp"
#include "divlab/suite.hpp"
