// Copyright 2026 The cmtf Authors
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

#include <string_view>

namespace cmtf {

/// Price movement of a stock on one day under the 2% rule.
enum class Movement { up, down, still };

constexpr std::string_view to_string(Movement m) noexcept {
  switch (m) {
    case Movement::up:
      return "up";
    case Movement::down:
      return "down";
    case Movement::still:
      return "still";
  }
  return "still";
}

}  // namespace cmtf
