// Copyright 2026 The Probe Authors
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

#include "probe/aggregate.hpp"
#include "probe/augment.hpp"
#include "probe/backend.hpp"
#include "probe/dataset.hpp"
#include "probe/error.hpp"
#include "probe/evaluate.hpp"
#include "probe/http.hpp"
#include "probe/pipeline.hpp"
#include "probe/text.hpp"
