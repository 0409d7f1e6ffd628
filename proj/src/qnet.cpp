#include "mordq/qnet.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>

#include "mordq/error.hpp"
#include "mordq/rng.hpp"

namespace mordq {

namespace {

constexpr std::size_t kColTile = 8;

// out(r, j) = b_j + sum_k in(r, k) w_kj, k ascending, with w row-major nin x nout.
// Columns go in register blocks of eight.
void affine_raw(const double* in, std::size_t rows, std::size_t nin, const double* w, const double* b,
                std::size_t nout, double* out) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* x = in + r * nin;
    std::size_t j = 0;
    for (; j + kColTile <= nout; j += kColTile) {
      double a[kColTile];
      for (std::size_t c = 0; c < kColTile; ++c) a[c] = b[j + c];
      for (std::size_t k = 0; k < nin; ++k) {
        const double* wk = w + k * nout + j;
        const double v = x[k];
        for (std::size_t c = 0; c < kColTile; ++c) a[c] += v * wk[c];
      }
      for (std::size_t c = 0; c < kColTile; ++c) out[r * nout + j + c] = a[c];
    }
    for (; j < nout; ++j) {
      double a = b[j];
      for (std::size_t k = 0; k < nin; ++k) a += x[k] * w[k * nout + j];
      out[r * nout + j] = a;
    }
  }
}

void affine_rows(const double* in, std::size_t rows, const DenseLayer& layer, double* out) {
  affine_raw(in, rows, layer.inputs, layer.weights.data(), layer.bias.data(), layer.outputs, out);
}

void relu_inplace(std::span<double> v) {
  for (double& x : v) x = x > 0.0 ? x : 0.0;
}

// Activations of every layer; acts[0] is the input, acts.back() the output.
std::vector<std::vector<double>> forward_all(const QNetwork& net, std::span<const double> inputs, std::size_t rows) {
  const auto& layers = net.layers();
  std::vector<std::vector<double>> acts(layers.size() + 1);
  acts[0].assign(inputs.begin(), inputs.end());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    acts[l + 1].resize(rows * layers[l].outputs);
    affine_rows(acts[l].data(), rows, layers[l], acts[l + 1].data());
    if (l + 1 < layers.size()) relu_inplace(acts[l + 1]);
  }
  return acts;
}

void check_rows(const QNetwork& net, const Matrix& m, std::size_t width, const char* what) {
  if (m.cols != width || m.data.size() != m.rows * m.cols)
    throw Error(ErrorCode::ShapeMismatch, std::string(what) + " has " + std::to_string(m.cols) +
                                              " columns, expected " + std::to_string(width));
  (void)net;
}

template <class T>
void put(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <class T>
T get(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw Error(ErrorCode::CorruptFile, "truncated network record");
  return value;
}

constexpr char kMagic[8] = {'M', 'O', 'R', 'D', 'Q', 'N', 'E', 'T'};
constexpr std::uint32_t kFormatVersion = 1;

}  // namespace

QNetwork::QNetwork(std::vector<std::size_t> widths) : widths_(std::move(widths)) {
  if (widths_.size() < 2) throw Error(ErrorCode::ShapeMismatch, "network needs input and output widths");
  for (std::size_t w : widths_)
    if (w == 0) throw Error(ErrorCode::ShapeMismatch, "zero layer width");
  for (std::size_t l = 0; l + 1 < widths_.size(); ++l) {
    DenseLayer layer;
    layer.inputs = widths_[l];
    layer.outputs = widths_[l + 1];
    layer.weights.assign(layer.inputs * layer.outputs, 0.0);
    layer.bias.assign(layer.outputs, 0.0);
    layers_.push_back(std::move(layer));
  }
}

void QNetwork::forward_rows(std::span<const double> inputs, std::size_t rows, std::span<double> out) const {
  if (inputs.size() != rows * input_width() || out.size() != rows * output_width())
    throw Error(ErrorCode::ShapeMismatch, "forward: input holds " + std::to_string(inputs.size()) +
                                              " values, expected rows x " + std::to_string(input_width()));
  if (layers_.size() == 1) {
    affine_rows(inputs.data(), rows, layers_[0], out.data());
    return;
  }
  std::vector<double> a;
  std::vector<double> b(rows * layers_[0].outputs);
  affine_rows(inputs.data(), rows, layers_[0], b.data());
  relu_inplace(b);
  forward_tail(b, rows, out, a);
}

void QNetwork::forward_tail(std::vector<double>& hidden, std::size_t rows, std::span<double> out,
                            std::vector<double>& scratch) const {
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (l + 1 == layers_.size()) {
      affine_rows(hidden.data(), rows, layers_[l], out.data());
      return;
    }
    scratch.resize(rows * layers_[l].outputs);
    affine_rows(hidden.data(), rows, layers_[l], scratch.data());
    relu_inplace(scratch);
    std::swap(hidden, scratch);
  }
}

void QNetwork::forward_factored(std::span<const double> head, std::span<const double> body, std::size_t rows,
                                std::span<const double> tails, std::span<double> out) const {
  const std::size_t nh = head.size();
  const std::size_t nb = rows == 0 ? 0 : body.size() / rows;
  const std::size_t np = tails.size();
  if (nh + nb + 1 != input_width() || body.size() != rows * nb || out.size() != rows * np * output_width())
    throw Error(ErrorCode::ShapeMismatch, "factored forward: row layout does not match the input width");
  if (rows == 0 || np == 0) return;
  const DenseLayer& first = layers_[0];
  const std::size_t h = first.outputs;
  const double* w = first.weights.data();

  // Same accumulation order as a full row: bias, head, body, tail.
  std::vector<double> seed(h);
  affine_raw(head.data(), 1, nh, w, first.bias.data(), h, seed.data());
  std::vector<double> partial(rows * h);
  affine_raw(body.data(), rows, nb, w + nh * h, seed.data(), h, partial.data());

  const double* wt = w + (nh + nb) * h;
  const bool single = layers_.size() == 1;
  std::vector<double> act(single ? 0 : rows * np * h);
  double* dst = single ? out.data() : act.data();
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t p = 0; p < np; ++p) {
      const double* src = partial.data() + r * h;
      double* o = dst + (r * np + p) * h;
      const double x = tails[p];
      for (std::size_t j = 0; j < h; ++j) o[j] = src[j] + x * wt[j];
    }
  if (single) return;
  relu_inplace(act);
  std::vector<double> scratch;
  forward_tail(act, rows * np, out, scratch);
}

std::vector<double> QNetwork::forward(std::span<const double> input) const {
  std::vector<double> out(output_width());
  forward_rows(input, 1, out);
  return out;
}

Matrix QNetwork::forward(const Matrix& inputs) const {
  check_rows(*this, inputs, input_width(), "forward input");
  Matrix out(inputs.rows, output_width());
  forward_rows(inputs.data, inputs.rows, out.data);
  return out;
}

std::size_t QNetwork::parameter_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : layers_) n += l.weights.size() + l.bias.size();
  return n;
}

std::vector<double> QNetwork::parameters() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  for (const auto& l : layers_) {
    flat.insert(flat.end(), l.weights.begin(), l.weights.end());
    flat.insert(flat.end(), l.bias.begin(), l.bias.end());
  }
  return flat;
}

void QNetwork::set_parameters(std::span<const double> flat) {
  if (flat.size() != parameter_count()) throw Error(ErrorCode::ShapeMismatch, "parameter vector length");
  auto it = flat.begin();
  for (auto& l : layers_) {
    std::copy_n(it, l.weights.size(), l.weights.begin());
    it += static_cast<std::ptrdiff_t>(l.weights.size());
    std::copy_n(it, l.bias.size(), l.bias.begin());
    it += static_cast<std::ptrdiff_t>(l.bias.size());
  }
}

QNetwork init_network(std::vector<std::size_t> widths, std::uint64_t seed) {
  QNetwork net(std::move(widths));
  Rng rng(seed);
  for (auto& l : net.layers()) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(l.inputs));
    for (double& w : l.weights) w = rng.uniform(-bound, bound);
    for (double& b : l.bias) b = rng.uniform(-bound, bound);
  }
  return net;
}

double loss_and_gradient(const QNetwork& net, const Matrix& inputs, const Matrix& targets,
                         std::vector<double>* gradient) {
  check_rows(net, inputs, net.input_width(), "inputs");
  check_rows(net, targets, net.output_width(), "targets");
  if (inputs.rows != targets.rows || inputs.rows == 0)
    throw Error(ErrorCode::ShapeMismatch, "inputs and targets differ in row count");

  const std::size_t n = inputs.rows;
  const auto& layers = net.layers();
  const auto acts = forward_all(net, inputs.data, n);
  const auto& y = acts.back();

  double loss = 0.0;
  std::vector<double> delta(y.size());
  const double scale = 2.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < y.size(); ++i) {
    const double e = y[i] - targets.data[i];
    loss += e * e;
    delta[i] = scale * e;
  }
  loss /= static_cast<double>(n);
  if (gradient == nullptr) return loss;

  gradient->assign(net.parameter_count(), 0.0);
  // Offsets of each layer's block inside the flat gradient.
  std::vector<std::size_t> offset(layers.size());
  for (std::size_t l = 0, o = 0; l < layers.size(); ++l) {
    offset[l] = o;
    o += layers[l].weights.size() + layers[l].bias.size();
  }

  for (std::size_t l = layers.size(); l-- > 0;) {
    const DenseLayer& layer = layers[l];
    const auto& a_prev = acts[l];
    double* gw = gradient->data() + offset[l];
    double* gb = gw + layer.weights.size();
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = delta.data() + i * layer.outputs;
      const double* a = a_prev.data() + i * layer.inputs;
      for (std::size_t k = 0; k < layer.inputs; ++k) {
        const double ak = a[k];
        if (ak == 0.0) continue;
        double* g = gw + k * layer.outputs;
        for (std::size_t j = 0; j < layer.outputs; ++j) g[j] += ak * d[j];
      }
      for (std::size_t j = 0; j < layer.outputs; ++j) gb[j] += d[j];
    }
    if (l == 0) break;
    std::vector<double> prev(n * layer.inputs, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double* d = delta.data() + i * layer.outputs;
      const double* a = a_prev.data() + i * layer.inputs;
      double* p = prev.data() + i * layer.inputs;
      for (std::size_t k = 0; k < layer.inputs; ++k) {
        if (!(a[k] > 0.0)) continue;  // rectifier derivative
        const double* wk = layer.weights.data() + k * layer.outputs;
        double s = 0.0;
        for (std::size_t j = 0; j < layer.outputs; ++j) s += wk[j] * d[j];
        p[k] = s;
      }
    }
    delta = std::move(prev);
  }
  return loss;
}

void SgdOptimizer::step(QNetwork& net, std::span<const double> gradient) {
  const std::size_t n = net.parameter_count();
  if (gradient.size() != n) throw Error(ErrorCode::ShapeMismatch, "gradient length");
  if (velocity_.size() != n) velocity_.assign(n, 0.0);

  double clip = 1.0;
  if (max_grad_norm_ > 0.0) {
    double sq = 0.0;
    for (double g : gradient) sq += g * g;
    const double norm = std::sqrt(sq);
    if (norm > max_grad_norm_) clip = max_grad_norm_ / norm;
  }

  std::size_t i = 0;
  for (auto& l : net.layers()) {
    for (double& w : l.weights) {
      velocity_[i] = momentum_ * velocity_[i] - learn_rate_ * clip * gradient[i];
      w += velocity_[i];
      ++i;
    }
    for (double& b : l.bias) {
      velocity_[i] = momentum_ * velocity_[i] - learn_rate_ * clip * gradient[i];
      b += velocity_[i];
      ++i;
    }
  }
}

double fit_batch(QNetwork& net, SgdOptimizer& optimizer, const Matrix& inputs, const Matrix& targets) {
  std::vector<double> gradient;
  const double loss = loss_and_gradient(net, inputs, targets, &gradient);
  optimizer.step(net, gradient);
  return loss;
}

Matrix bellman_targets(const TransitionBatch& batch, const QNetwork& net, const QNetwork& target_net,
                       double alpha) {
  const std::size_t n = batch.size();
  if (batch.inputs.rows != n || batch.next_inputs.rows != n || batch.rewards.size() != n ||
      batch.gammas.size() != n || batch.terminal.size() != n)
    throw Error(ErrorCode::ShapeMismatch, "transition batch fields differ in length");

  Matrix targets = net.forward(batch.inputs);
  const Matrix next_q = target_net.forward(batch.next_inputs);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t a = batch.actions[i];
    if (a >= targets.cols) throw Error(ErrorCode::ShapeMismatch, "action id beyond network outputs");
    double bootstrap = batch.rewards[i];
    if (!batch.terminal[i]) {
      const auto row = next_q.row(i);
      bootstrap += batch.gammas[i] * *std::max_element(row.begin(), row.end());
    }
    targets(i, a) = (1.0 - alpha) * targets(i, a) + alpha * bootstrap;
  }
  return targets;
}

void TargetNetwork::sync(const QNetwork& online, std::uint64_t period) {
  ++staleness;
  if (staleness >= period) {
    net = online;
    staleness = 0;
  }
}

void write_network(std::ostream& out, const QNetwork& net) {
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, kFormatVersion);
  put<std::uint64_t>(out, net.widths().size());
  for (std::size_t w : net.widths()) put<std::uint64_t>(out, w);
  for (double p : net.parameters()) put<double>(out, p);
}

QNetwork read_network(std::istream& in) {
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
    throw Error(ErrorCode::CorruptFile, "not a network record");
  const auto version = get<std::uint32_t>(in);
  if (version != kFormatVersion) throw Error(ErrorCode::CorruptFile, "unsupported version " + std::to_string(version));
  const auto count = get<std::uint64_t>(in);
  if (count < 2 || count > 64) throw Error(ErrorCode::CorruptFile, "bad layer count");
  std::vector<std::size_t> widths(count);
  for (auto& w : widths) {
    w = get<std::uint64_t>(in);
    if (w == 0 || w > (1u << 20)) throw Error(ErrorCode::CorruptFile, "bad layer width");
  }
  QNetwork net(std::move(widths));
  std::vector<double> params(net.parameter_count());
  for (double& p : params) p = get<double>(in);
  net.set_parameters(params);
  return net;
}

}  // namespace mordq
