// Copyright 2026 The circleflow Authors.
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

#include "circleflow/circle_geometry.hpp"
#include "circleflow/conditions.hpp"
#include "circleflow/curvature.hpp"
#include "circleflow/error.hpp"
#include "circleflow/io.hpp"
#include "circleflow/layout.hpp"
#include "circleflow/mesh.hpp"
#include "circleflow/solver.hpp"
