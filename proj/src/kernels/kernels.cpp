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

#include "dogclr/kernels/kernels.hpp"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <mutex>

#include "dogclr/kernels/ref.hpp"

namespace dogclr::kernels {

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

template <typename T>
Ops<T> scalar_ops() {
  return Ops<T>{
      &ref::dot<T>,  &ref::axpy<T>,      &ref::scal<T>, &ref::sum<T>,
      &ref::sumsq<T>, &ref::relu<T>,     &ref::relu_grad<T>,
      &ref::mul<T>,  &ref::mul_add<T>,
  };
}

Ops<float> avx2_ops_f32() {
  return Ops<float>{
      &avx2::dot_f32,  &avx2::axpy_f32,      &avx2::scal_f32, &avx2::sum_f32,
      &avx2::sumsq_f32, &avx2::relu_f32,     &avx2::relu_grad_f32,
      &avx2::mul_f32,  &avx2::mul_add_f32,
  };
}

Ops<double> avx2_ops_f64() {
  return Ops<double>{
      &avx2::dot_f64,  &avx2::axpy_f64,      &avx2::scal_f64, &avx2::sum_f64,
      &avx2::sumsq_f64, &avx2::relu_f64,     &avx2::relu_grad_f64,
      &avx2::mul_f64,  &avx2::mul_add_f64,
  };
}

struct Dispatch {
  Backend backend;
  Ops<float> f32;
  Ops<double> f64;
};

Dispatch resolve() {
  const char* env = std::getenv("DOGCLR_KERNELS");
  Backend want = Backend::avx2;
  if (env && *env) {
    if (std::strcmp(env, "scalar") == 0) {
      want = Backend::scalar;
    } else if (std::strcmp(env, "avx2") == 0) {
      if (!cpu_supports_avx2()) {
        std::fprintf(stderr,
                     "[dogclr] DOGCLR_KERNELS=avx2 requested but the CPU "
                     "lacks AVX2+FMA; falling back to scalar\n");
        want = Backend::scalar;
      }
    } else if (std::strcmp(env, "auto") != 0) {
      std::fprintf(stderr, "[dogclr] unknown DOGCLR_KERNELS value '%s', using auto\n",
                   env);
    }
  }
  if (want == Backend::avx2 && !cpu_supports_avx2()) {
    want = Backend::scalar;
  }
  if (want == Backend::avx2) {
    return Dispatch{Backend::avx2, avx2_ops_f32(), avx2_ops_f64()};
  }
  return Dispatch{Backend::scalar, scalar_ops<float>(), scalar_ops<double>()};
}

const Dispatch& dispatch() {
  static const Dispatch d = resolve();
  return d;
}

}  // namespace

Backend active_backend() { return dispatch().backend; }

const char* backend_name(Backend b) {
  return b == Backend::avx2 ? "avx2" : "scalar";
}

const Ops<float>& f32() { return dispatch().f32; }
const Ops<double>& f64() { return dispatch().f64; }

}  // namespace dogclr::kernels
