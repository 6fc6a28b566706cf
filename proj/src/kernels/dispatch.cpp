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

#include <cstdlib>
#include <string>

#include "cmtf/error.hpp"
#include "cmtf/kernels.hpp"

namespace cmtf::kernels {

bool available(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return true;
    case Backend::avx2:
#if defined(CMTF_HAVE_AVX2)
      return detail::avx2_supported();
#else
      return false;
#endif
    case Backend::neon:
#if defined(CMTF_HAVE_NEON)
      return true;
#else
      return false;
#endif
  }
  return false;
}

std::string_view name(Backend b) noexcept {
  switch (b) {
    case Backend::scalar:
      return "scalar";
    case Backend::avx2:
      return "avx2";
    case Backend::neon:
      return "neon";
  }
  return "unknown";
}

Backend parse_backend(std::string_view s) {
  if (s == "scalar") return Backend::scalar;
  if (s == "avx2") return Backend::avx2;
  if (s == "neon") return Backend::neon;
  throw ConfigError("unknown kernel backend '" + std::string(s) + "'");
}

const KernelTable& table(Backend b) {
  if (!available(b)) {
    throw ConfigError("kernel backend '" + std::string(name(b)) + "' is not available");
  }
  switch (b) {
#if defined(CMTF_HAVE_AVX2)
    case Backend::avx2:
      return detail::kAvx2Table;
#endif
#if defined(CMTF_HAVE_NEON)
    case Backend::neon:
      return detail::kNeonTable;
#endif
    default:
      return detail::kScalarTable;
  }
}

namespace {

const KernelTable& select_from_environment() {
  const char* env = std::getenv("CMTF_KERNELS");
  std::string_view want = env ? env : "auto";
  if (want != "auto" && !want.empty()) return table(parse_backend(want));
  if (available(Backend::avx2)) return table(Backend::avx2);
  if (available(Backend::neon)) return table(Backend::neon);
  return detail::kScalarTable;
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& chosen = select_from_environment();
  return chosen;
}

}  // namespace cmtf::kernels
