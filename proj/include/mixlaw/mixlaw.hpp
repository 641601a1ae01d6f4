/*
 * Copyright 2026 The mixlaw Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <mixlaw/baseline.hpp>
#include <mixlaw/core.hpp>
#include <mixlaw/entropy.hpp>
#include <mixlaw/error.hpp>
#include <mixlaw/evaluate.hpp>
#include <mixlaw/fitting.hpp>
#include <mixlaw/io.hpp>
#include <mixlaw/law.hpp>
#include <mixlaw/lsq.hpp>
#include <mixlaw/optimize.hpp>
#include <mixlaw/parallel.hpp>
#include <mixlaw/random.hpp>
