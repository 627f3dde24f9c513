#pragma once

#include "ratio/architecture.hpp"
#include "ratio/tensor.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ratio {

/// Scalar functional of the logits. Returns the value and writes
/// d value / d logits into the second argument.
using LogitLoss = std::function<double(std::span<const double>, std::span<double>)>;

/// Logits function f: [0,1]^d -> R^K with input and parameter gradients.
///
/// The value is immutable during evaluation and safe to share read-only
/// across threads; all scratch state is per call.
class Classifier {
public:
  Classifier(Architecture arch, std::vector<double> params);

  /// Fan-in scaled uniform initialization: weights U(-sqrt(6/fan_in), +),
  /// biases U(-1/sqrt(fan_in), +).
  static Classifier initialize(Architecture arch, std::uint64_t seed);

  const Architecture &architecture() const noexcept { return arch_; }
  std::size_t input_dim() const noexcept { return arch_.input_dim(); }
  std::size_t num_classes() const noexcept { return arch_.num_classes(); }
  std::size_t num_params() const noexcept { return params_.size(); }

  std::span<const double> params() const noexcept { return params_; }
  std::span<double> mutable_params() noexcept { return params_; }

  std::vector<double> logits(std::span<const double> x) const;
  Matrix forward_logits(std::span<const DenseVector> batch) const;
  std::size_t predict(std::span<const double> x) const;

  /// Writes grad_x loss(f(x)) into grad_x; returns loss(f(x)).
  double input_gradient(std::span<const double> x, const LogitLoss &loss,
                        std::span<double> grad_x) const;
  DenseVector input_gradient(const DenseVector &x, const LogitLoss &loss) const;

  /// grad_params += scale * grad_theta loss(f(x)); returns loss(f(x)).
  double accumulate_parameter_gradient(std::span<const double> x, const LogitLoss &loss,
                                       std::span<double> grad_params, double scale = 1.0) const;

  friend bool operator==(const Classifier &a, const Classifier &b) {
    return a.arch_ == b.arch_ && a.params_ == b.params_;
  }

private:
  using Activations = std::vector<std::vector<double>>;

  void forward(std::span<const double> x, Activations &acts) const;
  void backward(const Activations &acts, std::span<const double> dlogits,
                std::span<double> grad_x, std::span<double> grad_params, double scale) const;
  double run(std::span<const double> x, const LogitLoss &loss, std::span<double> grad_x,
             std::span<double> grad_params, double scale) const;

  Architecture arch_;
  std::vector<double> params_;
};

} // namespace ratio
