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

#ifndef FEDWALK_SIMD_KERNELS_H_
#define FEDWALK_SIMD_KERNELS_H_

#include <cstddef>
#include <span>
#include <string_view>

namespace fedwalk::simd {

// Flat function table for the data-parallel inner loops. Every variant must
// agree with the scalar reference up to floating-point reassociation; the
// equivalence tests pin the tolerance.
struct KernelTable {
  std::string_view name;

  // sum_i |a[i] - b[i]|
  double (*l1_distance_f64)(const double* a, const double* b, std::size_t n);
  // sum_i a[i] * b[i]
  float (*dot_f32)(const float* a, const float* b, std::size_t n);
  double (*dot_f64)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy_f32)(float alpha, const float* x, float* y, std::size_t n);
  void (*axpy_f64)(double alpha, const double* x, double* y, std::size_t n);
};

const KernelTable& ScalarKernels();

// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* Avx2Kernels();
const KernelTable* NeonKernels();

// Best available variant. FEDWALK_SIMD=scalar|avx2|neon in the environment
// pins the choice (an unavailable request falls back to scalar).
const KernelTable& ActiveKernels();

// Overrides the active table for the rest of the process. Test hook.
void SetActiveKernels(const KernelTable& table);

inline double L1Distance(std::span<const double> a, std::span<const double> b) {
  return ActiveKernels().l1_distance_f64(a.data(), b.data(), a.size());
}
inline float Dot(std::span<const float> a, std::span<const float> b) {
  return ActiveKernels().dot_f32(a.data(), b.data(), a.size());
}
inline double Dot(std::span<const double> a, std::span<const double> b) {
  return ActiveKernels().dot_f64(a.data(), b.data(), a.size());
}
inline void Axpy(float alpha, std::span<const float> x, std::span<float> y) {
  ActiveKernels().axpy_f32(alpha, x.data(), y.data(), x.size());
}
inline void Axpy(double alpha, std::span<const double> x,
                 std::span<double> y) {
  ActiveKernels().axpy_f64(alpha, x.data(), y.data(), x.size());
}

}  // namespace fedwalk::simd

#endif  // FEDWALK_SIMD_KERNELS_H_
