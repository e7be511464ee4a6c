// SPDX-License-Identifier: Apache-2.0
//
// railbeam: ray-tracing narrow-beam channel simulation for high-speed railway scenarios
// Copyright (C) 2026 The railbeam Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include "railbeam/accel.hpp"
#include "railbeam/antenna.hpp"
#include "railbeam/beam_tracking.hpp"
#include "railbeam/channel_stats.hpp"
#include "railbeam/em.hpp"
#include "railbeam/geometry.hpp"
#include "railbeam/io.hpp"
#include "railbeam/kpi.hpp"
#include "railbeam/scene_builders.hpp"
#include "railbeam/scene_io.hpp"
#include "railbeam/sweep.hpp"
#include "railbeam/tracer.hpp"
#include "railbeam/version.hpp"
