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

#include <Eigen/Dense>
#include <array>
#include <stdexcept>
#include <string>
#include <vector>

#include "striker/perception.hpp"
#include "striker/rng.hpp"

namespace striker::net {

template <typename T>
using Matrix = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <typename T>
using Vector = Eigen::Matrix<T, Eigen::Dynamic, 1>;

enum class ArchKind { kTeacher, kStudent };

inline constexpr double kLogStdMin = -5.0;
inline constexpr double kLogStdMax = 1.0;

// Single-frame MLP over the privileged observation: actor trunk to the action
// mean, a separate critic trunk with task- and cost-value heads.
struct TeacherDesc {
  int obs_dim = perception::kPrivDim;
  int action_dim = perception::kActionDim;
  std::array<int, 3> hidden{256, 256, 128};
  std::vector<double> input_scale;  // per-entry; sized obs_dim

  static TeacherDesc make_default();
};

// History encoder (two strided 1-D convolutions over the time axis plus a
// dense layer to the latent) feeding an MLP trunk on [latent; newest frame].
struct StudentDesc {
  int obs_dim = perception::kObsDim;
  int history = perception::kHistory;
  int conv1_channels = 32, conv1_kernel = 5, conv1_stride = 2;
  int conv2_channels = 32, conv2_kernel = 5, conv2_stride = 2;
  int latent_dim = 64;
  std::array<int, 3> hidden{256, 256, 128};
  int action_dim = perception::kActionDim;
  std::vector<double> input_scale;  // per-entry; sized obs_dim

  int conv1_len() const { return (history - conv1_kernel) / conv1_stride + 1; }
  int conv2_len() const { return (conv1_len() - conv2_kernel) / conv2_stride + 1; }
  int flat_dim() const { return conv2_channels * conv2_len(); }
  int trunk_in() const { return latent_dim + obs_dim; }

  static StudentDesc make_default();
};

// Fixed per-entry input scaling keeps the tanh stacks out of saturation for
// field-scale positions; the scales are part of the architecture descriptor.
inline std::vector<double> default_obs_scale() {
  std::vector<double> s(perception::kObsDim, 1.0);
  s[perception::Obs::kCmdOmega] = 0.5;
  s[perception::Obs::kYawRate] = 0.5;
  s[perception::Obs::kBallX] = 0.2;
  s[perception::Obs::kBallY] = 0.2;
  s[perception::Obs::kGoalX] = 0.1;
  s[perception::Obs::kGoalY] = 0.1;
  return s;
}

inline std::vector<double> default_priv_scale() {
  std::vector<double> s = default_obs_scale();
  s.resize(perception::kPrivDim, 1.0);
  s[perception::Priv::kBallVelX] = 0.25;
  s[perception::Priv::kBallVelY] = 0.25;
  s[perception::Priv::kPushX] = 5.0;
  s[perception::Priv::kPushY] = 5.0;
  return s;
}

inline TeacherDesc TeacherDesc::make_default() {
  TeacherDesc d;
  d.input_scale = default_priv_scale();
  return d;
}

inline StudentDesc StudentDesc::make_default() {
  StudentDesc d;
  d.input_scale = default_obs_scale();
  return d;
}

template <typename T>
struct NamedTensor {
  std::string name;
  Matrix<T> value;
};

// Teacher tensor order (also the serialization order).
struct TIx {
  enum : int {
    kAW0, kAB0, kAW1, kAB1, kAW2, kAB2, kAW3, kAB3,
    kCW0, kCB0, kCW1, kCB1, kCW2, kCB2, kCWr, kCBr, kCWc, kCBc,
    kLogStd, kCount
  };
};

// Student tensor order: encoder first, then the teacher-shaped trunk.
struct SIx {
  enum : int {
    kEW1, kEB1, kEW2, kEB2, kEW3, kEB3,
    kAW0, kAB0, kAW1, kAB1, kAW2, kAB2, kAW3, kAB3,
    kCW0, kCB0, kCW1, kCB1, kCW2, kCB2, kCWr, kCBr, kCWc, kCBc,
    kLogStd, kCount
  };
};

template <typename T>
struct ParamBundle {
  ArchKind kind = ArchKind::kTeacher;
  TeacherDesc teacher;
  StudentDesc student;
  std::vector<NamedTensor<T>> tensors;

  // Derived scale vectors (not serialized as parameters).
  Vector<T> obs_scale;   // trunk input frame
  Vector<T> hist_scale;  // repeated per-frame scale over the history window

  Matrix<T>& at(int i) { return tensors[i].value; }
  const Matrix<T>& at(int i) const { return tensors[i].value; }

  int action_dim() const {
    return kind == ArchKind::kTeacher ? teacher.action_dim : student.action_dim;
  }
  int log_std_index() const {
    return kind == ArchKind::kTeacher ? static_cast<int>(TIx::kLogStd)
                                      : static_cast<int>(SIx::kLogStd);
  }
  const Matrix<T>& log_std() const { return at(log_std_index()); }
  Matrix<T>& log_std() { return at(log_std_index()); }

  size_t parameter_count() const {
    size_t n = 0;
    for (const auto& t : tensors) n += static_cast<size_t>(t.value.size());
    return n;
  }

  void set_zero() {
    for (auto& t : tensors) t.value.setZero();
  }

  // Flat-index access across tensors in declaration order (column-major within
  // each tensor); used by the finite-difference checks.
  T get_flat(size_t i) const {
    for (const auto& t : tensors) {
      const size_t n = static_cast<size_t>(t.value.size());
      if (i < n) return t.value.data()[i];
      i -= n;
    }
    throw std::out_of_range("ParamBundle: flat index out of range");
  }
  void add_flat(size_t i, T delta) {
    for (auto& t : tensors) {
      const size_t n = static_cast<size_t>(t.value.size());
      if (i < n) {
        t.value.data()[i] += delta;
        return;
      }
      i -= n;
    }
    throw std::out_of_range("ParamBundle: flat index out of range");
  }

  template <typename U>
  ParamBundle<U> cast() const {
    ParamBundle<U> out;
    out.kind = kind;
    out.teacher = teacher;
    out.student = student;
    out.tensors.reserve(tensors.size());
    for (const auto& t : tensors) {
      out.tensors.push_back({t.name, t.value.template cast<U>()});
    }
    out.obs_scale = obs_scale.template cast<U>();
    out.hist_scale = hist_scale.template cast<U>();
    return out;
  }
};

namespace detail {

template <typename T>
void add_tensor(ParamBundle<T>& b, const std::string& name, int rows, int cols) {
  NamedTensor<T> t;
  t.name = name;
  t.value = Matrix<T>::Zero(rows, cols);
  b.tensors.push_back(std::move(t));
}

template <typename T>
void add_trunk_tensors(ParamBundle<T>& b, int in_dim, const std::array<int, 3>& hidden,
                       int action_dim) {
  add_tensor(b, "actor.w0", hidden[0], in_dim);
  add_tensor(b, "actor.b0", hidden[0], 1);
  add_tensor(b, "actor.w1", hidden[1], hidden[0]);
  add_tensor(b, "actor.b1", hidden[1], 1);
  add_tensor(b, "actor.w2", hidden[2], hidden[1]);
  add_tensor(b, "actor.b2", hidden[2], 1);
  add_tensor(b, "actor.w3", action_dim, hidden[2]);
  add_tensor(b, "actor.b3", action_dim, 1);
  add_tensor(b, "critic.w0", hidden[0], in_dim);
  add_tensor(b, "critic.b0", hidden[0], 1);
  add_tensor(b, "critic.w1", hidden[1], hidden[0]);
  add_tensor(b, "critic.b1", hidden[1], 1);
  add_tensor(b, "critic.w2", hidden[2], hidden[1]);
  add_tensor(b, "critic.b2", hidden[2], 1);
  add_tensor(b, "critic.wr", 1, hidden[2]);
  add_tensor(b, "critic.br", 1, 1);
  add_tensor(b, "critic.wc", 1, hidden[2]);
  add_tensor(b, "critic.bc", 1, 1);
}

template <typename T>
void finish_scales(ParamBundle<T>& b) {
  const std::vector<double>& scale =
      b.kind == ArchKind::kTeacher ? b.teacher.input_scale : b.student.input_scale;
  b.obs_scale.resize(static_cast<int>(scale.size()));
  for (size_t i = 0; i < scale.size(); ++i) b.obs_scale[static_cast<int>(i)] = T(scale[i]);
  if (b.kind == ArchKind::kStudent) {
    const int frame = b.student.obs_dim;
    b.hist_scale.resize(frame * b.student.history);
    for (int f = 0; f < b.student.history; ++f) {
      for (int d = 0; d < frame; ++d) b.hist_scale[f * frame + d] = T(scale[d]);
    }
  }
}

}  // namespace detail

template <typename T>
ParamBundle<T> make_teacher(const TeacherDesc& desc) {
  if (static_cast<int>(desc.input_scale.size()) != desc.obs_dim) {
    throw std::invalid_argument("TeacherDesc: input_scale size mismatch");
  }
  ParamBundle<T> b;
  b.kind = ArchKind::kTeacher;
  b.teacher = desc;
  detail::add_trunk_tensors(b, desc.obs_dim, desc.hidden, desc.action_dim);
  detail::add_tensor(b, "log_std", desc.action_dim, 1);
  detail::finish_scales(b);
  return b;
}

template <typename T>
ParamBundle<T> make_student(const StudentDesc& desc) {
  if (static_cast<int>(desc.input_scale.size()) != desc.obs_dim) {
    throw std::invalid_argument("StudentDesc: input_scale size mismatch");
  }
  if (desc.conv1_len() < desc.conv2_kernel) {
    throw std::invalid_argument("StudentDesc: history too short for the conv stack");
  }
  ParamBundle<T> b;
  b.kind = ArchKind::kStudent;
  b.student = desc;
  detail::add_tensor(b, "encoder.w1", desc.conv1_channels, desc.obs_dim * desc.conv1_kernel);
  detail::add_tensor(b, "encoder.b1", desc.conv1_channels, 1);
  detail::add_tensor(b, "encoder.w2", desc.conv2_channels, desc.conv1_channels * desc.conv2_kernel);
  detail::add_tensor(b, "encoder.b2", desc.conv2_channels, 1);
  detail::add_tensor(b, "encoder.w3", desc.latent_dim, desc.flat_dim());
  detail::add_tensor(b, "encoder.b3", desc.latent_dim, 1);
  detail::add_trunk_tensors(b, desc.trunk_in(), desc.hidden, desc.action_dim);
  detail::add_tensor(b, "log_std", desc.action_dim, 1);
  detail::finish_scales(b);
  return b;
}

// Orthogonal initialization (QR of a Gaussian draw, sign-fixed by diag(R)).
// Hidden layers use `hidden_gain`, the action-mean and value heads `out_gain`.
template <typename T>
void init_params(ParamBundle<T>& b, Rng& rng, double hidden_gain = 1.0, double out_gain = 0.01,
                 double log_std_init = -0.7) {
  auto orthogonal = [&rng](Matrix<T>& w, double gain) {
    const int rows = static_cast<int>(w.rows());
    const int cols = static_cast<int>(w.cols());
    const int big = std::max(rows, cols);
    const int small = std::min(rows, cols);
    Eigen::MatrixXd g(big, small);
    for (int j = 0; j < small; ++j) {
      for (int i = 0; i < big; ++i) g(i, j) = rng.normal();
    }
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
    Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(big, small);
    const Eigen::MatrixXd r = qr.matrixQR().topRows(small);
    for (int j = 0; j < small; ++j) {
      if (r(j, j) < 0) q.col(j) = -q.col(j);
    }
    Eigen::MatrixXd m = rows >= cols ? q : Eigen::MatrixXd(q.transpose());
    w = (gain * m).template cast<T>();
  };

  const bool is_teacher = b.kind == ArchKind::kTeacher;
  const int out_layers[3] = {
      is_teacher ? static_cast<int>(TIx::kAW3) : static_cast<int>(SIx::kAW3),
      is_teacher ? static_cast<int>(TIx::kCWr) : static_cast<int>(SIx::kCWr),
      is_teacher ? static_cast<int>(TIx::kCWc) : static_cast<int>(SIx::kCWc)};
  for (size_t i = 0; i < b.tensors.size(); ++i) {
    auto& t = b.tensors[i];
    if (static_cast<int>(i) == b.log_std_index()) {
      t.value.setConstant(T(log_std_init));
      continue;
    }
    if (t.value.cols() == 1) {
      t.value.setZero();  // bias
      continue;
    }
    const bool is_out = static_cast<int>(i) == out_layers[0] ||
                        static_cast<int>(i) == out_layers[1] ||
                        static_cast<int>(i) == out_layers[2];
    orthogonal(t.value, is_out ? out_gain : hidden_gain);
  }
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

template <typename T>
struct TeacherTrace {
  Matrix<T> xs;               // scaled input
  Matrix<T> a0, a1, a2, mean; // actor activations (tanh applied)
  Matrix<T> c0, c1, c2;       // critic activations
  bool with_critic = false;
  bool consumed = false;
};

template <typename T>
struct StudentTrace {
  Matrix<T> u1, a1, u2, a2;  // im2col buffers and conv activations
  Matrix<T> latent;          // tanh latent
  Matrix<T> xs;              // trunk input [latent; scaled obs]
  Matrix<T> t0, t1, t2, mean;
  Matrix<T> c0, c1, c2;
  bool with_critic = false;
  bool consumed = false;
};

namespace detail {

template <typename T>
void check_finite(const Matrix<T>& m, const char* what) {
  if (!m.allFinite()) throw std::runtime_error(std::string("net: non-finite output in ") + what);
}

// y = tanh(w x + b), batched over columns.
template <typename T>
void dense_tanh(const Matrix<T>& w, const Matrix<T>& b, const Matrix<T>& x, Matrix<T>& y) {
  y.noalias() = w * x;
  y.colwise() += b.col(0);
  y = y.array().tanh().matrix();
}

template <typename T>
void dense_linear(const Matrix<T>& w, const Matrix<T>& b, const Matrix<T>& x, Matrix<T>& y) {
  y.noalias() = w * x;
  y.colwise() += b.col(0);
}

// Backward through y = tanh(w x + b). dy is the gradient at the tanh output;
// accumulates dw, db and returns the gradient at x. `y` is the forward output.
template <typename T>
Matrix<T> dense_tanh_backward(const Matrix<T>& w, const Matrix<T>& x, const Matrix<T>& y,
                              const Matrix<T>& dy, Matrix<T>& dw, Matrix<T>& db) {
  const Matrix<T> dz = (dy.array() * (T(1) - y.array().square())).matrix();
  dw.noalias() += dz * x.transpose();
  db.col(0) += dz.rowwise().sum();
  Matrix<T> dx;
  dx.noalias() = w.transpose() * dz;
  return dx;
}

template <typename T>
Matrix<T> dense_linear_backward(const Matrix<T>& w, const Matrix<T>& x, const Matrix<T>& dy,
                                Matrix<T>& dw, Matrix<T>& db) {
  dw.noalias() += dy * x.transpose();
  db.col(0) += dy.rowwise().sum();
  Matrix<T> dx;
  dx.noalias() = w.transpose() * dy;
  return dx;
}

}  // namespace detail

// Teacher forward. `obs` is obs_dim x N (raw physical units). Outputs the
// tanh-bounded action mean and, if requested, both value heads.
template <typename T>
void forward_teacher(const ParamBundle<T>& p, const Eigen::Ref<const Matrix<T>>& obs,
                     Matrix<T>* mean_out, Matrix<T>* value_r, Matrix<T>* value_c,
                     TeacherTrace<T>* trace = nullptr, bool with_critic = true) {
  if (p.kind != ArchKind::kTeacher) throw std::invalid_argument("forward_teacher: wrong arch");
  if (obs.rows() != p.teacher.obs_dim) throw std::invalid_argument("forward_teacher: obs dim");

  TeacherTrace<T> local;
  TeacherTrace<T>& tr = trace ? *trace : local;
  tr.with_critic = with_critic;
  tr.consumed = false;

  tr.xs = obs.array().colwise() * p.obs_scale.array();
  detail::dense_tanh(p.at(TIx::kAW0), p.at(TIx::kAB0), tr.xs, tr.a0);
  detail::dense_tanh(p.at(TIx::kAW1), p.at(TIx::kAB1), tr.a0, tr.a1);
  detail::dense_tanh(p.at(TIx::kAW2), p.at(TIx::kAB2), tr.a1, tr.a2);
  detail::dense_tanh(p.at(TIx::kAW3), p.at(TIx::kAB3), tr.a2, tr.mean);
  detail::check_finite(tr.mean, "teacher actor");
  if (mean_out) *mean_out = tr.mean;

  if (with_critic) {
    detail::dense_tanh(p.at(TIx::kCW0), p.at(TIx::kCB0), tr.xs, tr.c0);
    detail::dense_tanh(p.at(TIx::kCW1), p.at(TIx::kCB1), tr.c0, tr.c1);
    detail::dense_tanh(p.at(TIx::kCW2), p.at(TIx::kCB2), tr.c1, tr.c2);
    if (value_r) {
      detail::dense_linear(p.at(TIx::kCWr), p.at(TIx::kCBr), tr.c2, *value_r);
      detail::check_finite(*value_r, "teacher value_r");
    }
    if (value_c) {
      detail::dense_linear(p.at(TIx::kCWc), p.at(TIx::kCBc), tr.c2, *value_c);
      detail::check_finite(*value_c, "teacher value_c");
    }
  }
}

// Teacher backward. d_mean/d_value_* are gradients at the corresponding
// outputs; parameter gradients are accumulated into `grads` (same shape
// bundle). A trace can be consumed exactly once.
template <typename T>
void backward_teacher(const ParamBundle<T>& p, TeacherTrace<T>& tr, const Matrix<T>& d_mean,
                      const Matrix<T>* d_value_r, const Matrix<T>* d_value_c,
                      ParamBundle<T>& grads) {
  if (tr.consumed) throw std::logic_error("backward_teacher: trace already consumed");
  tr.consumed = true;

  Matrix<T> d = detail::dense_tanh_backward(p.at(TIx::kAW3), tr.a2, tr.mean, d_mean,
                                            grads.at(TIx::kAW3), grads.at(TIx::kAB3));
  d = detail::dense_tanh_backward(p.at(TIx::kAW2), tr.a1, tr.a2, d, grads.at(TIx::kAW2),
                                  grads.at(TIx::kAB2));
  d = detail::dense_tanh_backward(p.at(TIx::kAW1), tr.a0, tr.a1, d, grads.at(TIx::kAW1),
                                  grads.at(TIx::kAB1));
  d = detail::dense_tanh_backward(p.at(TIx::kAW0), tr.xs, tr.a0, d, grads.at(TIx::kAW0),
                                  grads.at(TIx::kAB0));

  if (tr.with_critic && (d_value_r || d_value_c)) {
    Matrix<T> dc2 = Matrix<T>::Zero(tr.c2.rows(), tr.c2.cols());
    if (d_value_r) {
      dc2 += detail::dense_linear_backward(p.at(TIx::kCWr), tr.c2, *d_value_r,
                                           grads.at(TIx::kCWr), grads.at(TIx::kCBr));
    }
    if (d_value_c) {
      dc2 += detail::dense_linear_backward(p.at(TIx::kCWc), tr.c2, *d_value_c,
                                           grads.at(TIx::kCWc), grads.at(TIx::kCBc));
    }
    Matrix<T> dz = (dc2.array() * (T(1) - tr.c2.array().square())).matrix();
    grads.at(TIx::kCW2).noalias() += dz * tr.c1.transpose();
    grads.at(TIx::kCB2).col(0) += dz.rowwise().sum();
    Matrix<T> dc1 = p.at(TIx::kCW2).transpose() * dz;
    dz = (dc1.array() * (T(1) - tr.c1.array().square())).matrix();
    grads.at(TIx::kCW1).noalias() += dz * tr.c0.transpose();
    grads.at(TIx::kCB1).col(0) += dz.rowwise().sum();
    Matrix<T> dc0 = p.at(TIx::kCW1).transpose() * dz;
    dz = (dc0.array() * (T(1) - tr.c0.array().square())).matrix();
    grads.at(TIx::kCW0).noalias() += dz * tr.xs.transpose();
    grads.at(TIx::kCB0).col(0) += dz.rowwise().sum();
  }
}

// Student forward. `hist` is (history*obs_dim) x N with frames oldest-first
// and each frame contiguous; `obs` is the newest frame, obs_dim x N.
template <typename T>
void forward_student(const ParamBundle<T>& p, const Eigen::Ref<const Matrix<T>>& hist,
                     const Eigen::Ref<const Matrix<T>>& obs, Matrix<T>* mean_out,
                     Matrix<T>* value_r, Matrix<T>* value_c, StudentTrace<T>* trace = nullptr,
                     bool with_critic = true) {
  if (p.kind != ArchKind::kStudent) throw std::invalid_argument("forward_student: wrong arch");
  const StudentDesc& d = p.student;
  const int n = static_cast<int>(hist.cols());
  if (hist.rows() != d.history * d.obs_dim || obs.rows() != d.obs_dim || obs.cols() != n) {
    throw std::invalid_argument("forward_student: input dims");
  }

  StudentTrace<T> local;
  StudentTrace<T>& tr = trace ? *trace : local;
  tr.with_critic = with_critic;
  tr.consumed = false;

  const int t1 = d.conv1_len();
  const int t2 = d.conv2_len();
  const int c1 = d.conv1_channels;
  const int c2 = d.conv2_channels;

  // im2col over the (scaled) history window.
  const Matrix<T> xs_hist = hist.array().colwise() * p.hist_scale.array();
  tr.u1.resize(d.obs_dim * d.conv1_kernel, t1 * n);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < t1; ++t) {
      for (int j = 0; j < d.conv1_kernel; ++j) {
        tr.u1.block(j * d.obs_dim, s * t1 + t, d.obs_dim, 1) =
            xs_hist.block((t * d.conv1_stride + j) * d.obs_dim, s, d.obs_dim, 1);
      }
    }
  }
  detail::dense_tanh(p.at(SIx::kEW1), p.at(SIx::kEB1), tr.u1, tr.a1);

  tr.u2.resize(c1 * d.conv2_kernel, t2 * n);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < t2; ++t) {
      for (int j = 0; j < d.conv2_kernel; ++j) {
        tr.u2.block(j * c1, s * t2 + t, c1, 1) = tr.a1.col(s * t1 + t * d.conv2_stride + j);
      }
    }
  }
  detail::dense_tanh(p.at(SIx::kEW2), p.at(SIx::kEB2), tr.u2, tr.a2);

  // Flatten is a pure reinterpretation of the column-major conv output.
  Eigen::Map<const Matrix<T>> flat(tr.a2.data(), c2 * t2, n);
  tr.latent.noalias() = p.at(SIx::kEW3) * flat;
  tr.latent.colwise() += p.at(SIx::kEB3).col(0);
  tr.latent = tr.latent.array().tanh().matrix();

  tr.xs.resize(d.trunk_in(), n);
  tr.xs.topRows(d.latent_dim) = tr.latent;
  tr.xs.bottomRows(d.obs_dim) = obs.array().colwise() * p.obs_scale.array();

  detail::dense_tanh(p.at(SIx::kAW0), p.at(SIx::kAB0), tr.xs, tr.t0);
  detail::dense_tanh(p.at(SIx::kAW1), p.at(SIx::kAB1), tr.t0, tr.t1);
  detail::dense_tanh(p.at(SIx::kAW2), p.at(SIx::kAB2), tr.t1, tr.t2);
  detail::dense_tanh(p.at(SIx::kAW3), p.at(SIx::kAB3), tr.t2, tr.mean);
  detail::check_finite(tr.mean, "student actor");
  if (mean_out) *mean_out = tr.mean;

  if (with_critic) {
    detail::dense_tanh(p.at(SIx::kCW0), p.at(SIx::kCB0), tr.xs, tr.c0);
    detail::dense_tanh(p.at(SIx::kCW1), p.at(SIx::kCB1), tr.c0, tr.c1);
    detail::dense_tanh(p.at(SIx::kCW2), p.at(SIx::kCB2), tr.c1, tr.c2);
    if (value_r) {
      detail::dense_linear(p.at(SIx::kCWr), p.at(SIx::kCBr), tr.c2, *value_r);
      detail::check_finite(*value_r, "student value_r");
    }
    if (value_c) {
      detail::dense_linear(p.at(SIx::kCWc), p.at(SIx::kCBc), tr.c2, *value_c);
      detail::check_finite(*value_c, "student value_c");
    }
  }
}

template <typename T>
void backward_student(const ParamBundle<T>& p, StudentTrace<T>& tr, const Matrix<T>& d_mean,
                      const Matrix<T>* d_value_r, const Matrix<T>* d_value_c,
                      ParamBundle<T>& grads) {
  if (tr.consumed) throw std::logic_error("backward_student: trace already consumed");
  tr.consumed = true;
  const StudentDesc& d = p.student;
  const int n = static_cast<int>(tr.xs.cols());
  const int t1 = d.conv1_len();
  const int t2 = d.conv2_len();
  const int c1 = d.conv1_channels;
  const int c2 = d.conv2_channels;

  // Actor trunk.
  Matrix<T> dx = detail::dense_tanh_backward(p.at(SIx::kAW3), tr.t2, tr.mean, d_mean,
                                             grads.at(SIx::kAW3), grads.at(SIx::kAB3));
  dx = detail::dense_tanh_backward(p.at(SIx::kAW2), tr.t1, tr.t2, dx, grads.at(SIx::kAW2),
                                   grads.at(SIx::kAB2));
  dx = detail::dense_tanh_backward(p.at(SIx::kAW1), tr.t0, tr.t1, dx, grads.at(SIx::kAW1),
                                   grads.at(SIx::kAB1));
  Matrix<T> dxs = detail::dense_tanh_backward(p.at(SIx::kAW0), tr.xs, tr.t0, dx,
                                              grads.at(SIx::kAW0), grads.at(SIx::kAB0));

  // Critic trunk.
  if (tr.with_critic && (d_value_r || d_value_c)) {
    Matrix<T> dc2 = Matrix<T>::Zero(tr.c2.rows(), tr.c2.cols());
    if (d_value_r) {
      dc2 += detail::dense_linear_backward(p.at(SIx::kCWr), tr.c2, *d_value_r,
                                           grads.at(SIx::kCWr), grads.at(SIx::kCBr));
    }
    if (d_value_c) {
      dc2 += detail::dense_linear_backward(p.at(SIx::kCWc), tr.c2, *d_value_c,
                                           grads.at(SIx::kCWc), grads.at(SIx::kCBc));
    }
    Matrix<T> dz = (dc2.array() * (T(1) - tr.c2.array().square())).matrix();
    grads.at(SIx::kCW2).noalias() += dz * tr.c1.transpose();
    grads.at(SIx::kCB2).col(0) += dz.rowwise().sum();
    Matrix<T> dprev = p.at(SIx::kCW2).transpose() * dz;
    dz = (dprev.array() * (T(1) - tr.c1.array().square())).matrix();
    grads.at(SIx::kCW1).noalias() += dz * tr.c0.transpose();
    grads.at(SIx::kCB1).col(0) += dz.rowwise().sum();
    dprev = p.at(SIx::kCW1).transpose() * dz;
    dz = (dprev.array() * (T(1) - tr.c0.array().square())).matrix();
    grads.at(SIx::kCW0).noalias() += dz * tr.xs.transpose();
    grads.at(SIx::kCB0).col(0) += dz.rowwise().sum();
    dxs += p.at(SIx::kCW0).transpose() * dz;
  }

  // Encoder (the obs rows of dxs do not propagate anywhere).
  const Matrix<T> dlatent = dxs.topRows(d.latent_dim);
  Matrix<T> dz3 = (dlatent.array() * (T(1) - tr.latent.array().square())).matrix();
  Eigen::Map<const Matrix<T>> flat(tr.a2.data(), c2 * t2, n);
  grads.at(SIx::kEW3).noalias() += dz3 * flat.transpose();
  grads.at(SIx::kEB3).col(0) += dz3.rowwise().sum();
  Matrix<T> dflat;
  dflat.noalias() = p.at(SIx::kEW3).transpose() * dz3;
  Eigen::Map<const Matrix<T>> da2(dflat.data(), c2, t2 * n);

  Matrix<T> dz2 = (da2.array() * (T(1) - tr.a2.array().square())).matrix();
  grads.at(SIx::kEW2).noalias() += dz2 * tr.u2.transpose();
  grads.at(SIx::kEB2).col(0) += dz2.rowwise().sum();
  Matrix<T> du2;
  du2.noalias() = p.at(SIx::kEW2).transpose() * dz2;

  Matrix<T> da1 = Matrix<T>::Zero(c1, t1 * n);
  for (int s = 0; s < n; ++s) {
    for (int t = 0; t < t2; ++t) {
      for (int j = 0; j < d.conv2_kernel; ++j) {
        da1.col(s * t1 + t * d.conv2_stride + j) += du2.block(j * c1, s * t2 + t, c1, 1);
      }
    }
  }
  Matrix<T> dz1 = (da1.array() * (T(1) - tr.a1.array().square())).matrix();
  grads.at(SIx::kEW1).noalias() += dz1 * tr.u1.transpose();
  grads.at(SIx::kEB1).col(0) += dz1.rowwise().sum();
}

// ---------------------------------------------------------------------------
// Stochastic action head (diagonal normal around the tanh-bounded mean)
// ---------------------------------------------------------------------------

inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;  // 0.5*ln(2*pi)

template <typename T>
struct ActionSample {
  Vector<T> action;
  double logp = 0.0;
};

template <typename T>
ActionSample<T> sample_and_logprob(const Eigen::Ref<const Vector<T>>& mean,
                                   const Eigen::Ref<const Vector<T>>& log_std, Rng& rng) {
  const int n = static_cast<int>(mean.size());
  ActionSample<T> out;
  out.action.resize(n);
  double logp = 0.0;
  for (int i = 0; i < n; ++i) {
    const double ls = std::clamp(static_cast<double>(log_std[i]), kLogStdMin, kLogStdMax);
    const double sigma = std::exp(ls);
    const double eps = rng.normal();
    out.action[i] = static_cast<T>(static_cast<double>(mean[i]) + sigma * eps);
    logp += -0.5 * eps * eps - ls - kLogSqrt2Pi;
  }
  out.logp = logp;
  return out;
}

template <typename T>
double log_prob(const Eigen::Ref<const Vector<T>>& mean, const Eigen::Ref<const Vector<T>>& log_std,
                const Eigen::Ref<const Vector<T>>& action) {
  double logp = 0.0;
  for (int i = 0; i < mean.size(); ++i) {
    const double ls = std::clamp(static_cast<double>(log_std[i]), kLogStdMin, kLogStdMax);
    const double sigma = std::exp(ls);
    const double z = (static_cast<double>(action[i]) - static_cast<double>(mean[i])) / sigma;
    logp += -0.5 * z * z - ls - kLogSqrt2Pi;
  }
  return logp;
}

}  // namespace striker::net
