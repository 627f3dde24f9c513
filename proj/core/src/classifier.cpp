#include "ratio/classifier.hpp"

#include "ratio/error.hpp"
#include "ratio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ratio {

namespace {

void dense_forward(const Layer &l, const double *w, std::span<const double> in,
                   std::span<double> out) {
  const std::size_t n_in = l.in.size();
  const double *b = w + l.units * n_in;
  for (std::size_t o = 0; o < l.units; ++o) {
    const double *row = w + o * n_in;
    double s = b[o];
    for (std::size_t i = 0; i < n_in; ++i) s += row[i] * in[i];
    out[o] = s;
  }
}

void conv_forward(const Layer &l, const double *w, std::span<const double> in,
                  std::span<double> out) {
  const std::size_t ic_n = l.in.channels, ih = l.in.height, iw = l.in.width;
  const std::size_t oh = l.out.height, ow = l.out.width, k = l.kernel;
  const double *b = w + l.units * ic_n * k * k;
  for (std::size_t oc = 0; oc < l.units; ++oc) {
    for (std::size_t y = 0; y < oh; ++y) {
      for (std::size_t x = 0; x < ow; ++x) {
        double s = b[oc];
        for (std::size_t ic = 0; ic < ic_n; ++ic) {
          const double *kw = w + ((oc * ic_n + ic) * k) * k;
          const double *src = in.data() + (ic * ih + y) * iw + x;
          for (std::size_t ky = 0; ky < k; ++ky)
            for (std::size_t kx = 0; kx < k; ++kx) s += kw[ky * k + kx] * src[ky * iw + kx];
        }
        out[(oc * oh + y) * ow + x] = s;
      }
    }
  }
}

void pool_forward(const Layer &l, std::span<const double> in, std::span<double> out) {
  const std::size_t k = l.kernel, iw = l.in.width, ih = l.in.height;
  const double inv = 1.0 / static_cast<double>(k * k);
  for (std::size_t c = 0; c < l.out.channels; ++c)
    for (std::size_t y = 0; y < l.out.height; ++y)
      for (std::size_t x = 0; x < l.out.width; ++x) {
        double s = 0.0;
        for (std::size_t ky = 0; ky < k; ++ky)
          for (std::size_t kx = 0; kx < k; ++kx)
            s += in[(c * ih + y * k + ky) * iw + x * k + kx];
        out[(c * l.out.height + y) * l.out.width + x] = s * inv;
      }
}

} // namespace

Classifier::Classifier(Architecture arch, std::vector<double> params)
    : arch_(std::move(arch)), params_(std::move(params)) {
  if (params_.size() != arch_.num_params())
    throw InvalidArgument("Classifier: expected " + std::to_string(arch_.num_params()) +
                          " parameters, got " + std::to_string(params_.size()));
}

Classifier Classifier::initialize(Architecture arch, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> params(arch.num_params(), 0.0);
  for (const Layer &l : arch.layers()) {
    if (l.param_count == 0) continue;
    const std::size_t fan_in =
        l.kind == LayerKind::Dense ? l.in.size() : l.in.channels * l.kernel * l.kernel;
    const std::size_t n_weights = l.param_count - l.units;
    const double wb = std::sqrt(6.0 / static_cast<double>(fan_in));
    const double bb = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (std::size_t i = 0; i < n_weights; ++i)
      params[l.param_offset + i] = rng.uniform(-wb, wb);
    for (std::size_t i = 0; i < l.units; ++i)
      params[l.param_offset + n_weights + i] = rng.uniform(-bb, bb);
  }
  return Classifier(std::move(arch), std::move(params));
}

void Classifier::forward(std::span<const double> x, Activations &acts) const {
  require_same_dim(x.size(), arch_.input_dim(), "Classifier::forward");
  const auto &layers = arch_.layers();
  acts.resize(layers.size() + 1);
  acts[0].assign(x.begin(), x.end());
  for (std::size_t li = 0; li < layers.size(); ++li) {
    const Layer &l = layers[li];
    const std::vector<double> &in = acts[li];
    std::vector<double> &out = acts[li + 1];
    out.resize(l.out.size());
    const double *w = params_.data() + l.param_offset;
    switch (l.kind) {
    case LayerKind::Dense: dense_forward(l, w, in, out); break;
    case LayerKind::Conv: conv_forward(l, w, in, out); break;
    case LayerKind::AvgPool: pool_forward(l, in, out); break;
    case LayerKind::Relu:
      for (std::size_t i = 0; i < in.size(); ++i) out[i] = in[i] > 0.0 ? in[i] : 0.0;
      break;
    }
  }
}

void Classifier::backward(const Activations &acts, std::span<const double> dlogits,
                          std::span<double> grad_x, std::span<double> grad_params,
                          double scale) const {
  const auto &layers = arch_.layers();
  const bool want_params = !grad_params.empty();
  std::vector<double> dout(dlogits.begin(), dlogits.end());
  std::vector<double> din;

  for (std::size_t li = layers.size(); li-- > 0;) {
    const Layer &l = layers[li];
    const std::vector<double> &in = acts[li];
    const bool need_din = li > 0 || !grad_x.empty();
    din.assign(l.in.size(), 0.0);
    const double *w = params_.data() + l.param_offset;
    double *gw = want_params ? grad_params.data() + l.param_offset : nullptr;

    switch (l.kind) {
    case LayerKind::Dense: {
      const std::size_t n_in = l.in.size();
      for (std::size_t o = 0; o < l.units; ++o) {
        const double g = dout[o];
        if (g == 0.0) continue;
        const double *row = w + o * n_in;
        if (need_din)
          for (std::size_t i = 0; i < n_in; ++i) din[i] += row[i] * g;
        if (gw) {
          double *grow = gw + o * n_in;
          const double sg = scale * g;
          for (std::size_t i = 0; i < n_in; ++i) grow[i] += sg * in[i];
          gw[l.units * n_in + o] += sg;
        }
      }
      break;
    }
    case LayerKind::Relu:
      for (std::size_t i = 0; i < din.size(); ++i) din[i] = in[i] > 0.0 ? dout[i] : 0.0;
      break;
    case LayerKind::AvgPool: {
      const std::size_t k = l.kernel, iw = l.in.width, ih = l.in.height;
      const double inv = 1.0 / static_cast<double>(k * k);
      for (std::size_t c = 0; c < l.out.channels; ++c)
        for (std::size_t y = 0; y < l.out.height; ++y)
          for (std::size_t x = 0; x < l.out.width; ++x) {
            const double g = dout[(c * l.out.height + y) * l.out.width + x] * inv;
            for (std::size_t ky = 0; ky < k; ++ky)
              for (std::size_t kx = 0; kx < k; ++kx) din[(c * ih + y * k + ky) * iw + x * k + kx] = g;
          }
      break;
    }
    case LayerKind::Conv: {
      const std::size_t ic_n = l.in.channels, iw = l.in.width, ih = l.in.height;
      const std::size_t oh = l.out.height, ow = l.out.width, k = l.kernel;
      for (std::size_t oc = 0; oc < l.units; ++oc) {
        for (std::size_t y = 0; y < oh; ++y) {
          for (std::size_t x = 0; x < ow; ++x) {
            const double g = dout[(oc * oh + y) * ow + x];
            if (g == 0.0) continue;
            const double sg = scale * g;
            for (std::size_t ic = 0; ic < ic_n; ++ic) {
              const std::size_t kbase = ((oc * ic_n + ic) * k) * k;
              const std::size_t ibase = (ic * ih + y) * iw + x;
              for (std::size_t ky = 0; ky < k; ++ky)
                for (std::size_t kx = 0; kx < k; ++kx) {
                  const std::size_t wi = kbase + ky * k + kx;
                  const std::size_t ii = ibase + ky * iw + kx;
                  if (need_din) din[ii] += w[wi] * g;
                  if (gw) gw[wi] += sg * in[ii];
                }
            }
            if (gw) gw[l.units * ic_n * k * k + oc] += sg;
          }
        }
      }
      break;
    }
    }
    std::swap(dout, din);
  }
  if (!grad_x.empty()) std::copy(dout.begin(), dout.end(), grad_x.begin());
}

double Classifier::run(std::span<const double> x, const LogitLoss &loss,
                       std::span<double> grad_x, std::span<double> grad_params,
                       double scale) const {
  Activations acts;
  forward(x, acts);
  const std::vector<double> &logits = acts.back();
  std::vector<double> dlogits(logits.size(), 0.0);
  const double value = loss(logits, dlogits);
  backward(acts, dlogits, grad_x, grad_params, scale);
  return value;
}

std::vector<double> Classifier::logits(std::span<const double> x) const {
  Activations acts;
  forward(x, acts);
  return std::move(acts.back());
}

Matrix Classifier::forward_logits(std::span<const DenseVector> batch) const {
  Matrix out(batch.size(), num_classes());
  for (std::size_t r = 0; r < batch.size(); ++r) {
    const std::vector<double> f = logits(batch[r].span());
    std::copy(f.begin(), f.end(), out.row(r).begin());
  }
  return out;
}

std::size_t Classifier::predict(std::span<const double> x) const { return argmax(logits(x)); }

double Classifier::input_gradient(std::span<const double> x, const LogitLoss &loss,
                                  std::span<double> grad_x) const {
  require_same_dim(grad_x.size(), arch_.input_dim(), "Classifier::input_gradient");
  return run(x, loss, grad_x, {}, 1.0);
}

DenseVector Classifier::input_gradient(const DenseVector &x, const LogitLoss &loss) const {
  DenseVector g(x.size());
  input_gradient(x.span(), loss, g.span());
  return g;
}

double Classifier::accumulate_parameter_gradient(std::span<const double> x, const LogitLoss &loss,
                                                 std::span<double> grad_params,
                                                 double scale) const {
  require_same_dim(grad_params.size(), params_.size(),
                   "Classifier::accumulate_parameter_gradient");
  return run(x, loss, {}, grad_params, scale);
}

} // namespace ratio
