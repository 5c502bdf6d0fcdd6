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

#include <vector>

#include "striker/net.hpp"
#include "striker/perception.hpp"

namespace striker::diagnostics {

struct NoiseCheckRow {
  double speed = 0.0;
  double predicted_std = 0.0;
  double measured_std_x = 0.0;
  double measured_std_y = 0.0;
  double mean_bias = 0.0;  // norm of the sample-mean offset
  bool pass = false;
};

// Empirical check of the velocity-dependent noise model at the given apparent
// speeds: per-component std within `tolerance` (relative) of |v|/c_vel + c_min
// and mean bias below 3 sigma / sqrt(N).
inline std::vector<NoiseCheckRow> noise_check(const perception::NoiseParams& noise,
                                              const std::vector<double>& speeds, int samples,
                                              uint64_t seed, double tolerance = 0.02) {
  std::vector<NoiseCheckRow> rows;
  for (size_t k = 0; k < speeds.size(); ++k) {
    Rng rng(derive_seed(seed, 0x6e6f6973ULL, k));
    const Vec2 v_head{speeds[k], 0.0};
    const Vec2 p_true{1.0, -2.0};
    double sx = 0.0, sy = 0.0, sxx = 0.0, syy = 0.0;
    for (int i = 0; i < samples; ++i) {
      const Vec2 p = perception::velocity_dependent_noise(p_true, v_head, noise, rng);
      const Vec2 d = p - p_true;
      sx += d.x;
      sy += d.y;
      sxx += d.x * d.x;
      syy += d.y * d.y;
    }
    const double n = static_cast<double>(samples);
    const double mx = sx / n, my = sy / n;
    NoiseCheckRow row;
    row.speed = speeds[k];
    row.predicted_std = norm(v_head) / noise.c_vel + noise.c_min;
    row.measured_std_x = std::sqrt(std::max(0.0, sxx / n - mx * mx));
    row.measured_std_y = std::sqrt(std::max(0.0, syy / n - my * my));
    row.mean_bias = std::sqrt(mx * mx + my * my);
    const double tol = tolerance * row.predicted_std;
    const bool std_ok = row.predicted_std == 0.0
                            ? (row.measured_std_x == 0.0 && row.measured_std_y == 0.0)
                            : (std::abs(row.measured_std_x - row.predicted_std) <= tol &&
                               std::abs(row.measured_std_y - row.predicted_std) <= tol);
    const bool bias_ok = row.mean_bias <= 3.0 * row.predicted_std / std::sqrt(n) + 1e-12;
    row.pass = std_ok && bias_ok;
    rows.push_back(row);
  }
  return rows;
}

struct GradCheckResult {
  double max_rel_error = 0.0;
  int draws = 0;
  int coords_checked = 0;
  bool pass = false;
};

namespace detail {

// Scalar projection loss over all heads; keeps every output in the check.
template <typename EvalFn>
double fd_gradient(net::ParamBundle<double>& params, size_t flat_index, double h, EvalFn eval) {
  params.add_flat(flat_index, h);
  const double up = eval();
  params.add_flat(flat_index, -2.0 * h);
  const double down = eval();
  params.add_flat(flat_index, h);
  return (up - down) / (2.0 * h);
}

inline double rel_error(double a, double b) {
  const double denom = std::max({std::abs(a), std::abs(b), 1e-5});
  return std::abs(a - b) / denom;
}

}  // namespace detail

// Central-difference check of the analytic gradients at h on `draws` random
// (input, parameter-coordinate) pairs; `coords_per_draw` coordinates share one
// backward pass.
inline GradCheckResult grad_check_teacher(const net::TeacherDesc& desc, int draws,
                                          int coords_per_draw, double h, double tolerance,
                                          uint64_t seed) {
  GradCheckResult res;
  Rng rng(derive_seed(seed, 0x67726164ULL, 1));
  net::ParamBundle<double> params = net::make_teacher<double>(desc);
  net::init_params(params, rng);
  const size_t n_params = params.parameter_count();

  for (int draw = 0; draw < draws; ++draw) {
    net::Matrix<double> obs(desc.obs_dim, 1);
    for (int d = 0; d < desc.obs_dim; ++d) obs(d, 0) = rng.uniform(-2.0, 2.0);
    net::Vector<double> c_mean(desc.action_dim);
    for (int d = 0; d < desc.action_dim; ++d) c_mean[d] = rng.uniform(-1.0, 1.0);
    const double c_vr = rng.uniform(-1.0, 1.0);
    const double c_vc = rng.uniform(-1.0, 1.0);

    auto eval = [&]() {
      net::Matrix<double> mean, vr, vc;
      net::forward_teacher<double>(params, obs, &mean, &vr, &vc, nullptr, true);
      return (c_mean.array() * mean.col(0).array()).sum() + c_vr * vr(0, 0) + c_vc * vc(0, 0);
    };

    net::TeacherTrace<double> trace;
    net::Matrix<double> mean, vr, vc;
    net::forward_teacher<double>(params, obs, &mean, &vr, &vc, &trace, true);
    net::ParamBundle<double> grads = params;
    grads.set_zero();
    net::Matrix<double> d_mean = c_mean;
    net::Matrix<double> d_vr(1, 1), d_vc(1, 1);
    d_vr(0, 0) = c_vr;
    d_vc(0, 0) = c_vc;
    net::backward_teacher<double>(params, trace, d_mean, &d_vr, &d_vc, grads);

    for (int k = 0; k < coords_per_draw; ++k) {
      const size_t idx = rng.next_u64() % n_params;
      const double analytic = grads.get_flat(idx);
      const double fd = detail::fd_gradient(params, idx, h, eval);
      res.max_rel_error = std::max(res.max_rel_error, detail::rel_error(analytic, fd));
      ++res.coords_checked;
    }
    ++res.draws;
  }
  res.pass = res.max_rel_error < tolerance;
  return res;
}

inline GradCheckResult grad_check_student(const net::StudentDesc& desc, int draws,
                                          int coords_per_draw, double h, double tolerance,
                                          uint64_t seed) {
  GradCheckResult res;
  Rng rng(derive_seed(seed, 0x67726164ULL, 2));
  net::ParamBundle<double> params = net::make_student<double>(desc);
  net::init_params(params, rng);
  const size_t n_params = params.parameter_count();
  const int hist_dim = desc.history * desc.obs_dim;

  for (int draw = 0; draw < draws; ++draw) {
    net::Matrix<double> hist(hist_dim, 1), obs(desc.obs_dim, 1);
    for (int d = 0; d < hist_dim; ++d) hist(d, 0) = rng.uniform(-2.0, 2.0);
    for (int d = 0; d < desc.obs_dim; ++d) obs(d, 0) = rng.uniform(-2.0, 2.0);
    net::Vector<double> c_mean(desc.action_dim);
    for (int d = 0; d < desc.action_dim; ++d) c_mean[d] = rng.uniform(-1.0, 1.0);
    const double c_vr = rng.uniform(-1.0, 1.0);
    const double c_vc = rng.uniform(-1.0, 1.0);

    auto eval = [&]() {
      net::Matrix<double> mean, vr, vc;
      net::forward_student<double>(params, hist, obs, &mean, &vr, &vc, nullptr, true);
      return (c_mean.array() * mean.col(0).array()).sum() + c_vr * vr(0, 0) + c_vc * vc(0, 0);
    };

    net::StudentTrace<double> trace;
    net::Matrix<double> mean, vr, vc;
    net::forward_student<double>(params, hist, obs, &mean, &vr, &vc, &trace, true);
    net::ParamBundle<double> grads = params;
    grads.set_zero();
    net::Matrix<double> d_mean = c_mean;
    net::Matrix<double> d_vr(1, 1), d_vc(1, 1);
    d_vr(0, 0) = c_vr;
    d_vc(0, 0) = c_vc;
    net::backward_student<double>(params, trace, d_mean, &d_vr, &d_vc, grads);

    for (int k = 0; k < coords_per_draw; ++k) {
      const size_t idx = rng.next_u64() % n_params;
      const double analytic = grads.get_flat(idx);
      const double fd = detail::fd_gradient(params, idx, h, eval);
      res.max_rel_error = std::max(res.max_rel_error, detail::rel_error(analytic, fd));
      ++res.coords_checked;
    }
    ++res.draws;
  }
  res.pass = res.max_rel_error < tolerance;
  return res;
}

}  // namespace striker::diagnostics
