// Copyright 2026 The DMR Authors.
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

#include "dmr/model/gumbel.hpp"

namespace dmr {

double MaskRate(const MaskDecision& d) {
  int content = 0;
  int masked = 0;
  for (int i = 0; i < d.size(); ++i) {
    const auto k = static_cast<std::size_t>(i);
    if (d.special[k]) continue;
    ++content;
    masked += d.hard[k] ? 0 : 1;
  }
  return content == 0 ? 0.0 : static_cast<double>(masked) / content;
}

}  // namespace dmr
