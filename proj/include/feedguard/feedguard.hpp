// Copyright 2026 The feedguard Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "feedguard/aggregation.hpp"
#include "feedguard/enumeration.hpp"
#include "feedguard/error.hpp"
#include "feedguard/incentive.hpp"
#include "feedguard/ingest.hpp"
#include "feedguard/metrics.hpp"
#include "feedguard/model.hpp"
#include "feedguard/payoff.hpp"
#include "feedguard/simulation.hpp"
#include "feedguard/solver.hpp"
