#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace mordq {

// Dense row-major matrix; rows are examples.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) noexcept { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) noexcept { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data.data() + r * cols, cols}; }
  friend bool operator==(const Matrix&, const Matrix&) = default;
};

// weights is inputs x outputs, row k holding the fan-out of input k.
struct DenseLayer {
  std::size_t inputs = 0;
  std::size_t outputs = 0;
  std::vector<double> weights;
  std::vector<double> bias;

  double& w(std::size_t k, std::size_t j) noexcept { return weights[k * outputs + j]; }
  double w(std::size_t k, std::size_t j) const noexcept { return weights[k * outputs + j]; }
  friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
};

// Feed-forward Q approximator: rectifier hidden layers, identity output.
// Every output element is accumulated as bias + sum_k x_k w_kj in increasing
// k regardless of how many rows are evaluated together, so batched and
// single-row inference agree bit for bit.
class QNetwork {
 public:
  QNetwork() = default;
  // Zero-initialized network; widths = {input, hidden..., output}.
  explicit QNetwork(std::vector<std::size_t> widths);

  const std::vector<std::size_t>& widths() const noexcept { return widths_; }
  std::size_t input_width() const noexcept { return widths_.empty() ? 0 : widths_.front(); }
  std::size_t output_width() const noexcept { return widths_.empty() ? 0 : widths_.back(); }
  std::vector<DenseLayer>& layers() noexcept { return layers_; }
  const std::vector<DenseLayer>& layers() const noexcept { return layers_; }

  std::vector<double> forward(std::span<const double> input) const;
  Matrix forward(const Matrix& inputs) const;
  // Row-major inputs (rows x input_width) into out (rows x output_width).
  void forward_rows(std::span<const double> inputs, std::size_t rows, std::span<double> out) const;
  // Rows laid out as [head, body(r), tails[p]] for every r and p, output
  // ordered (r, p). Bit-identical to forward_rows on the assembled rows; the
  // head and body sums are shared across the tails.
  void forward_factored(std::span<const double> head, std::span<const double> body, std::size_t rows,
                        std::span<const double> tails, std::span<double> out) const;

  std::size_t parameter_count() const noexcept;
  // Flattened layer by layer, weights then bias.
  std::vector<double> parameters() const;
  void set_parameters(std::span<const double> flat);

  friend bool operator==(const QNetwork&, const QNetwork&) = default;

 private:
  // Layers 1.. applied to rectified first-layer activations in `hidden`.
  void forward_tail(std::vector<double>& hidden, std::size_t rows, std::span<double> out,
                    std::vector<double>& scratch) const;

  std::vector<std::size_t> widths_;
  std::vector<DenseLayer> layers_;
};

// Uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases.
QNetwork init_network(std::vector<std::size_t> widths, std::uint64_t seed);

// Mean over examples of the summed squared error across outputs, and its
// gradient with respect to every parameter (flattened like parameters()).
double loss_and_gradient(const QNetwork& net, const Matrix& inputs, const Matrix& targets,
                         std::vector<double>* gradient);

// Plain SGD with momentum; optional clipping of the gradient's L2 norm.
class SgdOptimizer {
 public:
  SgdOptimizer(double learn_rate, double momentum = 0.0, double max_grad_norm = 0.0)
      : learn_rate_(learn_rate), momentum_(momentum), max_grad_norm_(max_grad_norm) {}

  void step(QNetwork& net, std::span<const double> gradient);
  double learn_rate() const noexcept { return learn_rate_; }

 private:
  double learn_rate_;
  double momentum_;
  double max_grad_norm_;
  std::vector<double> velocity_;
};

// One gradient step on the mean squared error; returns the pre-step loss.
double fit_batch(QNetwork& net, SgdOptimizer& optimizer, const Matrix& inputs, const Matrix& targets);

struct TransitionBatch {
  Matrix inputs;       // rows: (s, w, gamma)
  Matrix next_inputs;  // rows: (s_new, w, gamma)
  std::vector<std::size_t> actions;
  std::vector<double> rewards;  // scalar (whitened) rewards
  std::vector<double> gammas;
  std::vector<char> terminal;

  std::size_t size() const noexcept { return actions.size(); }
};

// Target rows: current outputs everywhere except the taken action, which gets
// (1 - alpha) Q(s)_a + alpha (r + gamma max_a' Q_target(s_new)_a'); the
// bootstrap term is dropped on terminal transitions.
Matrix bellman_targets(const TransitionBatch& batch, const QNetwork& net, const QNetwork& target_net,
                       double alpha);

struct TargetNetwork {
  QNetwork net;
  std::uint64_t staleness = 0;

  // Called once per training update; hard copy when staleness reaches period.
  void sync(const QNetwork& online, std::uint64_t period);
};

// Versioned little-endian binary record of widths and parameters.
void write_network(std::ostream& out, const QNetwork& net);
QNetwork read_network(std::istream& in);

}  // namespace mordq
