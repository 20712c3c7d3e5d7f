/*
 * Copyright 2026 The stx authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header for the whole toolkit.

#include "stx/corpus.hpp"
#include "stx/errors.hpp"
#include "stx/evaluation.hpp"
#include "stx/expansion.hpp"
#include "stx/features.hpp"
#include "stx/jsonl.hpp"
#include "stx/learners.hpp"
#include "stx/manifest.hpp"
#include "stx/pipeline.hpp"
#include "stx/rng.hpp"
#include "stx/sparse.hpp"
#include "stx/synth.hpp"
#include "stx/taxonomy.hpp"
#include "stx/textprep.hpp"
#include "stx/unicode.hpp"
