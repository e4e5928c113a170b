//
// Copyright 2026 The FedWalk Simulator Authors
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
//

#include <atomic>
#include <cstdlib>
#include <string_view>

#include "fedwalk/simd/kernels.h"

namespace fedwalk::simd {

#if !defined(FEDWALK_HAVE_AVX2)
const KernelTable* Avx2Kernels() { return nullptr; }
#endif
#if !defined(FEDWALK_HAVE_NEON)
const KernelTable* NeonKernels() { return nullptr; }
#endif

namespace {

const KernelTable* SelectKernels() {
  const char* env = std::getenv("FEDWALK_SIMD");
  const std::string_view request = env != nullptr ? env : "";
  if (request == "scalar") return &ScalarKernels();
  if (request == "avx2") {
    const KernelTable* t = Avx2Kernels();
    return t != nullptr ? t : &ScalarKernels();
  }
  if (request == "neon") {
    const KernelTable* t = NeonKernels();
    return t != nullptr ? t : &ScalarKernels();
  }
  if (const KernelTable* t = Avx2Kernels()) return t;
  if (const KernelTable* t = NeonKernels()) return t;
  return &ScalarKernels();
}

std::atomic<const KernelTable*>& ActiveSlot() {
  static std::atomic<const KernelTable*> slot{SelectKernels()};
  return slot;
}

}  // namespace

const KernelTable& ActiveKernels() {
  return *ActiveSlot().load(std::memory_order_acquire);
}

void SetActiveKernels(const KernelTable& table) {
  ActiveSlot().store(&table, std::memory_order_release);
}

}  // namespace fedwalk::simd
