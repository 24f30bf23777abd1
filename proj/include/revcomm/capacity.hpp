// Copyright 2026 The Authors.
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

// Downlink sum-capacity objective for transmit antenna selection
//
//   C = log2 det(I + rho * (N_R / N_TS) * H_c P H_c^H)
//
// with H_c the N_TS x N_R channel rows of the selected antennas and P a
// diagonal power split over users, plus zero-forcing water-filling.

#pragma once

#include <Eigen/Dense>
#include <numeric>
#include <vector>

#include "revcomm/channel.hpp"

namespace revcomm {

using ComplexMatrix = Eigen::MatrixXcd;

struct CapacityParams {
  double rho = 1.0;  // linear SNR
  Index n_r = 1;
  Index n_ts = 1;

  static CapacityParams from_db(double snr_db, Index n_r, Index n_ts) {
    return CapacityParams{db_to_linear(snr_db), n_r, n_ts};
  }

  // rho * N_R / N_TS
  double scale() const { return rho * static_cast<double>(n_r) / static_cast<double>(n_ts); }

  void validate() const {
    require(rho > 0.0 && std::isfinite(rho), "capacity: rho must be positive and finite");
    require(n_r >= 1, "capacity: n_r must be >= 1");
    require(n_ts >= 1, "capacity: n_ts must be >= 1");
  }
};

// Diagonal of P.
struct PowerAllocation {
  std::vector<double> weights;

  double total() const { return std::accumulate(weights.begin(), weights.end(), 0.0); }

  // All diagonal entries 1/N_R.
  static PowerAllocation equal(Index n_r) {
    require(n_r >= 1, "PowerAllocation: n_r must be >= 1");
    return PowerAllocation{std::vector<double>(static_cast<std::size_t>(n_r), 1.0 / static_cast<double>(n_r))};
  }
};

namespace detail {

inline double log2_det_hpd(const ComplexMatrix& a) {
  const ComplexMatrix sym = (a + a.adjoint()) * 0.5;
  Eigen::LLT<ComplexMatrix> llt(sym);
  if (llt.info() != Eigen::Success) throw Infeasible("log-det argument is not positive definite");
  double acc = 0.0;
  const auto& l = llt.matrixLLT();
  for (Index i = 0; i < l.rows(); ++i) acc += std::log(l(i, i).real());
  return 2.0 * acc / std::numbers::ln2;
}

inline void check_finite(const ComplexMatrix& m, const char* what) {
  if (!m.allFinite()) throw InvalidInput(std::string(what) + ": non-finite entries");
}

}  // namespace detail

// log2 det(I + scale * H diag(p) H^H) for an arbitrary nonnegative scale.
// With scale = rho this is the receive-side objective (no per-antenna power
// split); sum_capacity uses scale = rho * N_R / N_TS.
inline double log_det_rate(const ComplexMatrix& h_c, const std::vector<double>& weights, double scale) {
  require(static_cast<Index>(weights.size()) == h_c.cols(), "log_det_rate: power allocation size != N_R");
  require(scale >= 0.0 && std::isfinite(scale), "log_det_rate: scale must be finite and nonnegative");
  for (double w : weights) require(w >= 0.0 && std::isfinite(w), "log_det_rate: negative or non-finite power weight");
  detail::check_finite(h_c, "log_det_rate");
  const Eigen::Map<const Eigen::VectorXd> p(weights.data(), static_cast<Index>(weights.size()));
  ComplexMatrix a = ComplexMatrix::Identity(h_c.rows(), h_c.rows());
  a.noalias() += scale * (h_c * p.cast<Complex>().asDiagonal() * h_c.adjoint());
  return std::max(0.0, detail::log2_det_hpd(a));
}

inline double sum_capacity(const ComplexMatrix& h_c, const PowerAllocation& p, const CapacityParams& params) {
  params.validate();
  require(h_c.rows() == params.n_ts, "sum_capacity: H_c rows != N_TS");
  require(h_c.cols() == params.n_r, "sum_capacity: H_c cols != N_R");
  return log_det_rate(h_c, p.weights, params.scale());
}

// Rows `selected` of subcarrier s.
inline ComplexMatrix select_rows(const ChannelTensor& h, const AntennaSet& selected, Index s) {
  const auto full = h.subcarrier(s);
  ComplexMatrix out(static_cast<Index>(selected.size()), h.n_r());
  for (std::size_t i = 0; i < selected.size(); ++i) out.row(static_cast<Index>(i)) = full.row(selected[i]);
  return out;
}

inline void check_selection(const ChannelTensor& h, const AntennaSet& selected) {
  require(!selected.empty(), "empty antenna selection");
  require(distinct_in_range(selected, h.n_t()), "antenna selection must be distinct indices in [0, N_T)");
}

// Arithmetic mean over subcarriers of log_det_rate with an explicit scale.
inline double mean_log_det_rate(const ChannelTensor& h, const AntennaSet& selected,
                                const PowerAllocation& p, double scale) {
  check_selection(h, selected);
  double acc = 0.0;
  for (Index s = 0; s < h.n_subcarriers(); ++s) acc += log_det_rate(select_rows(h, selected, s), p.weights, scale);
  return acc / static_cast<double>(h.n_subcarriers());
}

inline double mean_capacity_over_subcarriers(const ChannelTensor& h, const AntennaSet& selected,
                                             const PowerAllocation& p, const CapacityParams& params) {
  params.validate();
  check_selection(h, selected);
  require(params.n_ts == static_cast<Index>(selected.size()), "mean_capacity: |selected| != N_TS");
  require(params.n_r == h.n_r(), "mean_capacity: params.n_r != channel N_R");
  return mean_log_det_rate(h, selected, p, params.scale());
}

// Zero-forcing per-user gains g_r = 1 / [(H_c^H H_c)^{-1}]_rr.
inline std::vector<double> zero_forcing_gains(const ComplexMatrix& h_c) {
  detail::check_finite(h_c, "zero_forcing_gains");
  if (h_c.rows() < h_c.cols())
    throw Infeasible("zero forcing needs at least as many selected antennas as users");
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(h_c);
  qr.setThreshold(1e-10);
  if (qr.rank() < h_c.cols()) throw Infeasible("zero forcing: channel submatrix is rank deficient");
  const ComplexMatrix gram = h_c.adjoint() * h_c;
  Eigen::LLT<ComplexMatrix> llt((gram + gram.adjoint()) * 0.5);
  if (llt.info() != Eigen::Success) throw Infeasible("zero forcing: Gram matrix is not positive definite");
  const ComplexMatrix inv = llt.solve(ComplexMatrix::Identity(h_c.cols(), h_c.cols()));
  std::vector<double> gains(static_cast<std::size_t>(h_c.cols()));
  for (Index r = 0; r < h_c.cols(); ++r) gains[static_cast<std::size_t>(r)] = 1.0 / inv(r, r).real();
  return gains;
}

struct WaterFilling {
  PowerAllocation power;
  double level = 0.0;  // common value of p_r + 1/g_r over active users
};

// Maximizes sum log2(1 + g_r p_r) s.t. sum p_r = total_power, p_r >= 0.
// The water level is found by repeatedly dropping the weakest user while
// it would receive negative power.
inline WaterFilling waterfill(const std::vector<double>& gains, double total_power) {
  require(!gains.empty(), "waterfill: no users");
  require(total_power > 0.0 && std::isfinite(total_power), "waterfill: total power must be positive");
  for (double g : gains) require(g > 0.0 && std::isfinite(g), "waterfill: gains must be positive and finite");

  std::vector<std::size_t> order(gains.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gains[a] > gains[b]; });

  std::size_t active = order.size();
  double level = 0.0;
  for (;;) {
    double inverse_sum = 0.0;
    for (std::size_t i = 0; i < active; ++i) inverse_sum += 1.0 / gains[order[i]];
    level = (total_power + inverse_sum) / static_cast<double>(active);
    if (level - 1.0 / gains[order[active - 1]] >= 0.0 || active == 1) break;
    --active;
  }

  WaterFilling out{PowerAllocation{std::vector<double>(gains.size(), 0.0)}, level};
  for (std::size_t i = 0; i < active; ++i) out.power.weights[order[i]] = level - 1.0 / gains[order[i]];
  return out;
}

inline PowerAllocation waterfill_zero_forcing(const ComplexMatrix& h_c, double total_power) {
  return waterfill(zero_forcing_gains(h_c), total_power).power;
}

inline double zero_forcing_rate(const std::vector<double>& gains, const PowerAllocation& p) {
  require(gains.size() == p.weights.size(), "zero_forcing_rate: size mismatch");
  double acc = 0.0;
  for (std::size_t r = 0; r < gains.size(); ++r) acc += std::log2(1.0 + gains[r] * p.weights[r]);
  return acc;
}

// Power budget used for water-filling: rho * N_R / N_TS.
inline double waterfilling_budget(const CapacityParams& params) { return params.scale(); }

// Per subcarrier: ZF gains, water-filled power, sum_r log2(1 + g_r p_r);
// averaged over subcarriers.
inline double rate_after_waterfilling(const ChannelTensor& h, const AntennaSet& selected,
                                      const CapacityParams& params, double total_power) {
  params.validate();
  check_selection(h, selected);
  double acc = 0.0;
  for (Index s = 0; s < h.n_subcarriers(); ++s) {
    const auto gains = zero_forcing_gains(select_rows(h, selected, s));
    acc += zero_forcing_rate(gains, waterfill(gains, total_power).power);
  }
  return acc / static_cast<double>(h.n_subcarriers());
}

}  // namespace revcomm
