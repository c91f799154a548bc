// Copyright 2026 The dpeq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

// Umbrella header.

#include "dpeq/dynamics.hpp"
#include "dpeq/error.hpp"
#include "dpeq/game.hpp"
#include "dpeq/checks.hpp"
#include "dpeq/game_io.hpp"
#include "dpeq/graph_gen.hpp"
#include "dpeq/harness.hpp"
#include "dpeq/oracle.hpp"
#include "dpeq/parallel.hpp"
#include "dpeq/privacy.hpp"
#include "dpeq/rng.hpp"
#include "dpeq/simplex.hpp"
#include "dpeq/trace_io.hpp"
