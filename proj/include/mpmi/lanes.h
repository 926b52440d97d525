// Copyright 2026 The MPMI Shared Control Authors
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

#ifndef MPMI_LANES_H_
#define MPMI_LANES_H_

namespace mpmi {

// Samples advanced together by the block kernels. Block buffers are laid out
// variable-major: entry (var, lane) lives at var * kLanes + lane.
inline constexpr int kLanes = 8;

}  // namespace mpmi

#endif  // MPMI_LANES_H_
