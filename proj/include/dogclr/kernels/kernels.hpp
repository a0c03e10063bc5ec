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

#include <cstddef>

// Runtime-dispatched vector kernels. The active backend is resolved once per
// process: AVX2+FMA when the CPU supports it, scalar otherwise. Set
// DOGCLR_KERNELS=scalar|avx2|auto to override. Dispatch is per call through
// a function-pointer table; within one process (and one env) the selection is
// fixed, so results stay bit-reproducible run to run.

namespace dogclr::kernels {

enum class Backend { scalar, avx2 };

Backend active_backend();
const char* backend_name(Backend b);
bool cpu_supports_avx2();

template <typename T>
struct Ops {
  T (*dot)(const T*, const T*, std::size_t);
  void (*axpy)(T, const T*, T*, std::size_t);
  void (*scal)(T, T*, std::size_t);
  T (*sum)(const T*, std::size_t);
  T (*sumsq)(const T*, std::size_t);
  void (*relu)(const T*, T*, std::size_t);
  void (*relu_grad)(const T*, const T*, T*, std::size_t);
  void (*mul)(const T*, const T*, T*, std::size_t);
  void (*mul_add)(const T*, const T*, T*, std::size_t);
};

const Ops<float>& f32();
const Ops<double>& f64();

template <typename T>
const Ops<T>& ops();

template <>
inline const Ops<float>& ops<float>() { return f32(); }
template <>
inline const Ops<double>& ops<double>() { return f64(); }

// Convenience wrappers used by templated call sites.

template <typename T>
inline T dot(const T* x, const T* y, std::size_t n) {
  return ops<T>().dot(x, y, n);
}

template <typename T>
inline void axpy(T a, const T* x, T* y, std::size_t n) {
  ops<T>().axpy(a, x, y, n);
}

template <typename T>
inline void scal(T a, T* x, std::size_t n) {
  ops<T>().scal(a, x, n);
}

template <typename T>
inline T sum(const T* x, std::size_t n) {
  return ops<T>().sum(x, n);
}

template <typename T>
inline T sumsq(const T* x, std::size_t n) {
  return ops<T>().sumsq(x, n);
}

template <typename T>
inline void relu(const T* x, T* out, std::size_t n) {
  ops<T>().relu(x, out, n);
}

template <typename T>
inline void relu_grad(const T* x, const T* dy, T* dx, std::size_t n) {
  ops<T>().relu_grad(x, dy, dx, n);
}

template <typename T>
inline void mul(const T* x, const T* y, T* out, std::size_t n) {
  ops<T>().mul(x, y, out, n);
}

template <typename T>
inline void mul_add(const T* x, const T* y, T* out, std::size_t n) {
  ops<T>().mul_add(x, y, out, n);
}

// AVX2 entry points (defined in avx2.cpp, compiled with -mavx2 -mfma). Only
// call when cpu_supports_avx2() is true; exposed here so the equivalence
// tests can target the backend directly.
namespace avx2 {
float dot_f32(const float*, const float*, std::size_t);
void axpy_f32(float, const float*, float*, std::size_t);
void scal_f32(float, float*, std::size_t);
float sum_f32(const float*, std::size_t);
float sumsq_f32(const float*, std::size_t);
void relu_f32(const float*, float*, std::size_t);
void relu_grad_f32(const float*, const float*, float*, std::size_t);
void mul_f32(const float*, const float*, float*, std::size_t);
void mul_add_f32(const float*, const float*, float*, std::size_t);

double dot_f64(const double*, const double*, std::size_t);
void axpy_f64(double, const double*, double*, std::size_t);
void scal_f64(double, double*, std::size_t);
double sum_f64(const double*, std::size_t);
double sumsq_f64(const double*, std::size_t);
void relu_f64(const double*, double*, std::size_t);
void relu_grad_f64(const double*, const double*, double*, std::size_t);
void mul_f64(const double*, const double*, double*, std::size_t);
void mul_add_f64(const double*, const double*, double*, std::size_t);
}  // namespace avx2

}  // namespace dogclr::kernels
