#include "mordq/policy.hpp"

#include "mordq/error.hpp"

namespace mordq {

std::vector<double> state_features(const EnvState& state, const PolicySpec& spec) {
  if (state.lookback.size() != spec.lookback)
    throw Error(ErrorCode::ShapeMismatch, "state lookback differs from policy lookback");
  std::vector<double> f(spec.feature_width());
  for (std::size_t j = 0; j < spec.lookback; ++j) f[j] = state.lookback[j] * spec.feature_scale;
  f[spec.lookback] = sign_of(state.position);
  return f;
}

void assemble_input(std::span<const double> features, const WeightVector& w, double gamma,
                    const PolicySpec& spec, std::span<double> out) {
  if (features.size() != spec.feature_width() || out.size() != spec.input_width())
    throw Error(ErrorCode::ShapeMismatch, "input row width");
  std::size_t i = 0;
  for (double v : w.values) out[i++] = v;
  if (spec.generalize_gamma) out[i++] = gamma;
  std::copy(features.begin(), features.end(), out.begin() + static_cast<std::ptrdiff_t>(i));
}

std::vector<double> assemble_input(std::span<const double> features, const WeightVector& w, double gamma,
                                   const PolicySpec& spec) {
  std::vector<double> row(spec.input_width());
  assemble_input(features, w, gamma, spec, row);
  return row;
}

}  // namespace mordq

namespace mordq {

std::size_t greedy_action(std::span<const double> q) noexcept {
  std::size_t best = 0;
  for (std::size_t i = 1; i < q.size(); ++i)
    if (q[i] > q[best]) best = i;
  return best;
}

}  // namespace mordq
