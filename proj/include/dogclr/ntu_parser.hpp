// Copyright (c) 2026 DoGCLR Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include "dogclr/skeleton.hpp"

namespace dogclr {

/// Parses raw NTU skeleton-file text:
///   line 1: frame count
///   per frame: body count; per body: one metadata line, a joint-count line
///   (must be 25), then 25 joint lines whose first three fields are x y z.
/// The result has V=25, C=3 and is resampled to target_T by linear
/// interpolation of the frame index (exact copy when target_T equals the file
/// frame count). With primary_body_only the body with the largest summed
/// joint displacement is kept; otherwise the first body is.
///
/// Throws: EmptyFile, MalformedHeader, NoFrames, JointCountMismatch.
SkeletonSequence parse_ntu_skeleton(const std::string& text,
                                    std::size_t target_T,
                                    bool primary_body_only = true);

}  // namespace dogclr
