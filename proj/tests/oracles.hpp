#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "mordq/qnet.hpp"

namespace mordq::testing {

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& gen, double scale = 1.0) {
  std::normal_distribution<double> d(0.0, scale);
  Matrix m(rows, cols);
  for (double& x : m.data) x = d(gen);
  return m;
}

// Largest |analytic - numeric| / max(|analytic|, |numeric|, floor) over all
// parameters, numeric gradients by central differences with step h.
inline double gradient_check(const QNetwork& net, const Matrix& inputs, const Matrix& targets, double h = 1e-5,
                             double floor = 1e-6) {
  std::vector<double> analytic;
  loss_and_gradient(net, inputs, targets, &analytic);
  QNetwork probe = net;
  std::vector<double> p = net.parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    const double keep = p[i];
    p[i] = keep + h;
    probe.set_parameters(p);
    const double up = loss_and_gradient(probe, inputs, targets, nullptr);
    p[i] = keep - h;
    probe.set_parameters(p);
    const double down = loss_and_gradient(probe, inputs, targets, nullptr);
    p[i] = keep;
    const double numeric = (up - down) / (2 * h);
    const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
    worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
  }
  return worst;
}

// Two states, two actions, deterministic:
//   s0 -a0-> s0 (r 0)   s0 -a1-> s1 (r 1)
//   s1 -a0-> s0 (r 2)   s1 -a1-> s1 (r 0.5)
struct ToyMdp {
  static constexpr std::size_t next[2][2] = {{0, 1}, {0, 1}};
  static constexpr double reward[2][2] = {{0.0, 1.0}, {2.0, 0.5}};

  static std::array<std::array<double, 2>, 2> value_iteration(double gamma) {
    std::array<std::array<double, 2>, 2> q{};
    for (int it = 0; it < 5000; ++it) {
      auto nq = q;
      for (std::size_t s = 0; s < 2; ++s)
        for (std::size_t a = 0; a < 2; ++a) {
          const std::size_t n = next[s][a];
          nq[s][a] = reward[s][a] + gamma * std::max(q[n][0], q[n][1]);
        }
      q = nq;
    }
    return q;
  }

  // Deep-Q loop on a linear (no hidden layer) net over one-hot states; returns
  // the largest |Q - Q*| after training.
  static double train_error(double gamma, std::uint64_t seed, std::size_t iterations = 20000) {
    QNetwork net = init_network({2, 2}, seed);
    TargetNetwork target{net, 0};
    SgdOptimizer sgd(0.2, 0.0, 0.0);
    TransitionBatch batch;
    batch.inputs = Matrix(4, 2);
    batch.next_inputs = Matrix(4, 2);
    std::size_t row = 0;
    for (std::size_t s = 0; s < 2; ++s)
      for (std::size_t a = 0; a < 2; ++a, ++row) {
        batch.inputs(row, s) = 1.0;
        batch.next_inputs(row, next[s][a]) = 1.0;
        batch.actions.push_back(a);
        batch.rewards.push_back(reward[s][a]);
        batch.gammas.push_back(gamma);
        batch.terminal.push_back(0);
      }
    for (std::size_t it = 0; it < iterations; ++it) {
      const Matrix t = bellman_targets(batch, net, target.net, 1.0);
      fit_batch(net, sgd, batch.inputs, t);
      target.sync(net, 10);
    }
    const auto qstar = value_iteration(gamma);
    double err = 0.0;
    for (std::size_t s = 0; s < 2; ++s) {
      std::vector<double> x(2, 0.0);
      x[s] = 1.0;
      const auto q = net.forward(x);
      for (std::size_t a = 0; a < 2; ++a) err = std::max(err, std::abs(q[a] - qstar[s][a]));
    }
    return err;
  }
};

}  // namespace mordq::testing
