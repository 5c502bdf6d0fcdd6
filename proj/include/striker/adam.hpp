// Copyright 2026 The striker Authors
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

#include <cstdint>
#include <vector>

#include "striker/net.hpp"

namespace striker {

// Adaptive moment estimation with standard defaults. Moments are part of the
// training state and are checkpointed alongside the parameters.
template <typename T>
struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  int64_t t = 0;
  std::vector<net::Matrix<T>> m;
  std::vector<net::Matrix<T>> v;

  void init(const net::ParamBundle<T>& params) {
    t = 0;
    m.clear();
    v.clear();
    m.reserve(params.tensors.size());
    v.reserve(params.tensors.size());
    for (const auto& tensor : params.tensors) {
      m.push_back(net::Matrix<T>::Zero(tensor.value.rows(), tensor.value.cols()));
      v.push_back(net::Matrix<T>::Zero(tensor.value.rows(), tensor.value.cols()));
    }
  }

  bool initialized_for(const net::ParamBundle<T>& params) const {
    if (m.size() != params.tensors.size()) return false;
    for (size_t i = 0; i < m.size(); ++i) {
      if (m[i].rows() != params.tensors[i].value.rows() ||
          m[i].cols() != params.tensors[i].value.cols()) {
        return false;
      }
    }
    return true;
  }

  void step(net::ParamBundle<T>& params, const net::ParamBundle<T>& grads, double lr) {
    ++t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(t));
    for (size_t i = 0; i < params.tensors.size(); ++i) {
      auto& mi = m[i];
      auto& vi = v[i];
      const auto& g = grads.tensors[i].value;
      mi = T(beta1) * mi + T(1.0 - beta1) * g;
      vi = (T(beta2) * vi.array() + T(1.0 - beta2) * g.array().square()).matrix();
      const auto mhat = mi.array() / T(bc1);
      const auto vhat = vi.array() / T(bc2);
      params.tensors[i].value.array() -= T(lr) * mhat / (vhat.sqrt() + T(eps));
    }
  }

  template <typename U>
  AdamState<U> cast() const {
    AdamState<U> out;
    out.beta1 = beta1;
    out.beta2 = beta2;
    out.eps = eps;
    out.t = t;
    for (const auto& x : m) out.m.push_back(x.template cast<U>());
    for (const auto& x : v) out.v.push_back(x.template cast<U>());
    return out;
  }
};

// Plain gradient descent; used by tests that compare one update step against
// finite differences of the surrogate.
template <typename T>
void sgd_step(net::ParamBundle<T>& params, const net::ParamBundle<T>& grads, double lr) {
  for (size_t i = 0; i < params.tensors.size(); ++i) {
    params.tensors[i].value -= T(lr) * grads.tensors[i].value;
  }
}

template <typename T>
double global_grad_norm(const net::ParamBundle<T>& grads) {
  double sq = 0.0;
  for (const auto& t : grads.tensors) {
    sq += static_cast<double>(t.value.template cast<double>().squaredNorm());
  }
  return std::sqrt(sq);
}

template <typename T>
void scale_grads(net::ParamBundle<T>& grads, double s) {
  for (auto& t : grads.tensors) t.value *= T(s);
}

template <typename T>
void accumulate_grads(net::ParamBundle<T>& into, const net::ParamBundle<T>& from) {
  for (size_t i = 0; i < into.tensors.size(); ++i) {
    into.tensors[i].value += from.tensors[i].value;
  }
}

}  // namespace striker
