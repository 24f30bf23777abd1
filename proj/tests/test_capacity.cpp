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

#include <catch_amalgamated.hpp>

#include "revcomm/capacity.hpp"

using namespace revcomm;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

ComplexMatrix random_matrix(Index rows, Index cols, Rng& rng) {
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  ComplexMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = Complex(n(rng), n(rng));
  return m;
}

PowerAllocation random_power(Index n_r, Rng& rng) {
  std::uniform_real_distribution<double> u(0.05, 1.0);
  PowerAllocation p;
  for (Index i = 0; i < n_r; ++i) p.weights.push_back(u(rng));
  return p;
}

// Oracle: det(I_T + c H P H^H) = det(I_R + c P^1/2 H^H H P^1/2), evaluated
// through the eigenvalues of the N_R x N_R Hermitian form.
double eigen_oracle(const ComplexMatrix& h, const PowerAllocation& p, double scale) {
  Eigen::VectorXd sqrt_p(static_cast<Index>(p.weights.size()));
  for (std::size_t i = 0; i < p.weights.size(); ++i) sqrt_p(static_cast<Index>(i)) = std::sqrt(p.weights[i]);
  const ComplexMatrix d = sqrt_p.cast<Complex>().asDiagonal();
  const ComplexMatrix form = scale * (d * h.adjoint() * h * d);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(form);
  double acc = 0.0;
  for (Index i = 0; i < es.eigenvalues().size(); ++i) acc += std::log2(1.0 + std::max(0.0, es.eigenvalues()(i)));
  return acc;
}

ChannelTensor random_tensor(Index n_t, Index n_r, Index n_s, std::uint64_t seed) {
  ChannelTensor h(n_t, n_r, n_s);
  Rng rng(seed);
  std::normal_distribution<double> n(0.0, std::sqrt(0.5));
  for (auto& g : h.raw()) g = Complex(n(rng), n(rng));
  return h;
}

}  // namespace

TEST_CASE("sum_capacity closed form on identity channel") {
  const ComplexMatrix h = ComplexMatrix::Identity(2, 2);
  const double c = sum_capacity(h, PowerAllocation{{0.5, 0.5}}, CapacityParams{1.0, 2, 2});
  CHECK_THAT(c, WithinAbs(2.0 * std::log2(1.5), 1e-12));
  CHECK_THAT(c, WithinAbs(1.169925, 1e-6));
}

TEST_CASE("sum_capacity of an all-zero channel is zero") {
  CHECK(sum_capacity(ComplexMatrix::Zero(3, 2), PowerAllocation::equal(2), CapacityParams{2.0, 2, 3}) == 0.0);
}

TEST_CASE("sum_capacity matches the eigenvalue oracle on random 4x2 channels") {
  Rng rng(42);
  for (int trial = 0; trial < 200; ++trial) {
    const ComplexMatrix h = random_matrix(4, 2, rng);
    const PowerAllocation p = random_power(2, rng);
    const CapacityParams params{0.7, 2, 4};
    CHECK_THAT(sum_capacity(h, p, params), WithinAbs(eigen_oracle(h, p, params.scale()), 1e-9));
  }
}

TEST_CASE("sum_capacity input validation") {
  ComplexMatrix h = ComplexMatrix::Identity(2, 2);
  CHECK_THROWS_AS(sum_capacity(h, PowerAllocation::equal(2), CapacityParams{1.0, 2, 3}), InvalidInput);
  CHECK_THROWS_AS(sum_capacity(h, PowerAllocation::equal(3), CapacityParams{1.0, 2, 2}), InvalidInput);
  CHECK_THROWS_AS(sum_capacity(h, PowerAllocation::equal(2), CapacityParams{0.0, 2, 2}), InvalidInput);
  h(0, 1) = Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(sum_capacity(h, PowerAllocation::equal(2), CapacityParams{1.0, 2, 2}), InvalidInput);
}

TEST_CASE("sum_capacity is invariant under row permutation and increasing in rho") {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    const ComplexMatrix h = random_matrix(5, 3, rng);
    const PowerAllocation p = PowerAllocation::equal(3);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.setIdentity();
    std::shuffle(perm.indices().data(), perm.indices().data() + 5, rng);
    const ComplexMatrix shuffled = perm * h;
    const CapacityParams params{1.3, 3, 5};
    CHECK_THAT(sum_capacity(shuffled, p, params), WithinAbs(sum_capacity(h, p, params), 1e-12));

    double previous = 0.0;
    for (double rho : {0.1, 0.3, 1.0, 3.0, 10.0}) {
      const double c = sum_capacity(h, p, CapacityParams{rho, 3, 5});
      CHECK(c > previous);
      previous = c;
    }
  }
}

TEST_CASE("mean_capacity_over_subcarriers") {
  const ChannelTensor single = random_tensor(6, 2, 1, 3);
  const AntennaSet sel{4, 1, 2};
  const CapacityParams params{0.5, 2, 3};
  const auto p = PowerAllocation::equal(2);
  CHECK(mean_capacity_over_subcarriers(single, sel, p, params) == sum_capacity(select_rows(single, sel, 0), p, params));

  const ChannelTensor h = random_tensor(8, 2, 4, 5);
  const AntennaSet pick{0, 3, 5, 7};
  const AntennaSet permuted{7, 0, 5, 3};
  const CapacityParams p4{0.8, 2, 4};
  CHECK_THAT(mean_capacity_over_subcarriers(h, permuted, p, p4),
             WithinAbs(mean_capacity_over_subcarriers(h, pick, p, p4), 1e-12));

  // Hand-rolled loop oracle.
  double acc = 0.0;
  for (Index s = 0; s < 4; ++s) {
    ComplexMatrix hc(4, 2);
    for (int i = 0; i < 4; ++i)
      for (int r = 0; r < 2; ++r) hc(i, r) = h.at(pick[static_cast<std::size_t>(i)], r, s);
    acc += eigen_oracle(hc, p, 0.8 * 2.0 / 4.0);
  }
  CHECK_THAT(mean_capacity_over_subcarriers(h, pick, p, p4), WithinAbs(acc / 4.0, 1e-12));

  CHECK_THROWS_AS(mean_capacity_over_subcarriers(h, {}, p, p4), InvalidInput);
  CHECK_THROWS_AS(mean_capacity_over_subcarriers(h, {1, 1, 2, 3}, p, p4), InvalidInput);
  CHECK_THROWS_AS(mean_capacity_over_subcarriers(h, {1, 2, 3, 8}, p, p4), InvalidInput);
}

TEST_CASE("waterfill basic cases") {
  const auto sym = waterfill({3.0, 3.0}, 2.0);
  CHECK_THAT(sym.power.weights[0], WithinAbs(1.0, 1e-12));
  CHECK_THAT(sym.power.weights[1], WithinAbs(1.0, 1e-12));

  const auto single = waterfill({0.2}, 5.0);
  CHECK_THAT(single.power.weights[0], WithinAbs(5.0, 1e-12));

  // Grid-search oracle over p1 in [0, 1] at 1e-4 resolution.
  const std::vector<double> gains{4.0, 1.0};
  double best = -1.0;
  for (int i = 0; i <= 10000; ++i) {
    const double p1 = i * 1e-4;
    best = std::max(best, std::log2(1.0 + 4.0 * p1) + std::log2(1.0 + 1.0 * (1.0 - p1)));
  }
  const auto wf = waterfill(gains, 1.0);
  CHECK_THAT(zero_forcing_rate(gains, wf.power), WithinAbs(best, 1e-3));
  CHECK(zero_forcing_rate(gains, wf.power) >= best - 1e-12);
  // Closed form for this case: p1 = 0.5 + (1 - 1/4)/2.
  CHECK_THAT(wf.power.weights[0], WithinAbs(0.875, 1e-12));
}

TEST_CASE("waterfill satisfies the KKT conditions") {
  Rng rng(99);
  std::uniform_real_distribution<double> g(0.01, 10.0);
  std::uniform_real_distribution<double> budget(0.01, 5.0);
  for (int trial = 0; trial < 500; ++trial) {
    std::vector<double> gains(1 + trial % 8);
    for (auto& x : gains) x = g(rng);
    const double total = budget(rng);
    const auto wf = waterfill(gains, total);
    CHECK_THAT(wf.power.total(), WithinAbs(total, 1e-9));
    for (std::size_t r = 0; r < gains.size(); ++r) {
      const double p = wf.power.weights[r];
      CHECK(p >= 0.0);
      if (p > 0.0)
        CHECK_THAT(p + 1.0 / gains[r], WithinAbs(wf.level, 1e-9));
      else
        CHECK(1.0 / gains[r] >= wf.level - 1e-9);
    }
  }
}

TEST_CASE("zero forcing feasibility") {
  ComplexMatrix tall(3, 2);
  tall << 1, 2, 2, 4, 3, 6;  // second column = 2 * first
  CHECK_THROWS_AS(waterfill_zero_forcing(tall, 1.0), Infeasible);
  CHECK_THROWS_AS(waterfill_zero_forcing(ComplexMatrix::Identity(2, 3), 1.0), Infeasible);
}

TEST_CASE("rate_after_waterfilling") {
  // Orthogonal equal-norm columns: ZF gains are equal, so water-filling is an
  // equal split and the rate equals the equal-power log-det rate.
  ChannelTensor orth(4, 2, 3);
  for (Index s = 0; s < 3; ++s) {
    orth.at(0, 0, s) = Complex(1, 0);
    orth.at(1, 0, s) = Complex(0, 1);
    orth.at(2, 1, s) = Complex(1, 0);
    orth.at(3, 1, s) = Complex(-1, 0);
  }
  const AntennaSet all{0, 1, 2, 3};
  const CapacityParams params{0.9, 2, 4};
  const double wf = rate_after_waterfilling(orth, all, params, waterfilling_budget(params));
  const double eq = mean_capacity_over_subcarriers(orth, all, PowerAllocation::equal(2), params);
  CHECK_THAT(wf, WithinAbs(eq, 1e-12));

  const ChannelTensor h = random_tensor(6, 3, 5, 8);
  CHECK_THROWS_AS(rate_after_waterfilling(h, {0, 1}, CapacityParams{1.0, 3, 2}, 1.0), Infeasible);

  // Composition oracle.
  const AntennaSet sel{0, 2, 3, 5};
  double acc = 0.0;
  for (Index s = 0; s < 5; ++s) {
    const ComplexMatrix hc = select_rows(h, sel, s);
    const auto p = waterfill_zero_forcing(hc, 1.7);
    const auto g = zero_forcing_gains(hc);
    for (std::size_t r = 0; r < 3; ++r) acc += std::log2(1.0 + g[r] * p.weights[r]);
  }
  CHECK_THAT(rate_after_waterfilling(h, sel, CapacityParams{1.0, 3, 4}, 1.7), WithinAbs(acc / 5.0, 1e-12));
}

TEST_CASE("receive-side objective is monotone, transmit-side is not") {
  Rng rng(2024);
  const auto p = PowerAllocation::equal(2);
  bool found_decrease = false;
  for (int trial = 0; trial < 2000; ++trial) {
    const Index rows = 1 + trial % 6;
    const ComplexMatrix h = random_matrix(rows + 1, 2, rng);
    const ComplexMatrix smaller = h.topRows(rows);
    const double rho = 0.3;
    // Without the N_R / N_TS factor, adding a row never hurts.
    CHECK(log_det_rate(h, p.weights, rho) >= log_det_rate(smaller, p.weights, rho) - 1e-12);
    // With it, it sometimes does.
    const double before = sum_capacity(smaller, p, CapacityParams{rho, 2, rows});
    const double after = sum_capacity(h, p, CapacityParams{rho, 2, rows + 1});
    if (after < before) found_decrease = true;
  }
  CHECK(found_decrease);
}
