/*
 Copyright 2026 The safegame Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#ifndef SAFEGAME_SAFEGAME_HPP
#define SAFEGAME_SAFEGAME_HPP

#include "safegame/core_types.hpp"
#include "safegame/dynamics.hpp"
#include "safegame/barrier.hpp"
#include "safegame/cost.hpp"
#include "safegame/game_ddp.hpp"
#include "safegame/models.hpp"
#include "safegame/montecarlo.hpp"
#include "safegame/config.hpp"
#include "safegame/io.hpp"

#endif  // SAFEGAME_SAFEGAME_HPP
