#include "ratio/probability.hpp"

#include "ratio/error.hpp"
#include "ratio/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ratio {

ProbabilityVector::ProbabilityVector(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw InvalidArgument("ProbabilityVector: empty");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0)) throw InvalidArgument("ProbabilityVector: negative or NaN entry");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-9)
    throw InvalidArgument("ProbabilityVector: entries sum to " + std::to_string(sum));
}

double ProbabilityVector::max() const { return *std::max_element(probs_.begin(), probs_.end()); }

std::size_t ProbabilityVector::argmax() const { return ratio::argmax(probs_); }

LabelTarget LabelTarget::one_hot(std::size_t y, std::size_t num_classes) {
  if (num_classes < 1 || y >= num_classes)
    throw InvalidArgument("LabelTarget::one_hot: label " + std::to_string(y) +
                          " outside [0, " + std::to_string(num_classes) + ")");
  return {Kind::OneHot, y, num_classes};
}

LabelTarget LabelTarget::uniform(std::size_t num_classes) {
  if (num_classes < 1) throw InvalidArgument("LabelTarget::uniform: no classes");
  return {Kind::Uniform, 0, num_classes};
}

ProbabilityVector LabelTarget::materialize() const {
  std::vector<double> p(num_classes_);
  for (std::size_t j = 0; j < num_classes_; ++j) p[j] = weight(j);
  return ProbabilityVector(std::move(p));
}

ProbabilityVector softmax(std::span<const double> logits, double temperature) {
  if (!(temperature > 0.0)) throw InvalidArgument("softmax: temperature must be > 0");
  if (logits.size() < 2) throw InvalidArgument("softmax: need at least 2 classes");
  const double m = *std::max_element(logits.begin(), logits.end());
  std::vector<double> p(logits.size());
  double z = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    p[i] = std::exp((logits[i] - m) / temperature);
    z += p[i];
  }
  for (double &v : p) v /= z;
  return ProbabilityVector(std::move(p), ProbabilityVector::Unchecked{});
}

void log_softmax(std::span<const double> logits, std::span<double> out) {
  require_same_dim(logits.size(), out.size(), "log_softmax");
  const double m = *std::max_element(logits.begin(), logits.end());
  double z = 0.0;
  for (double f : logits) z += std::exp(f - m);
  const double lse = m + std::log(z);
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
}

double cross_entropy(const LabelTarget &target, const ProbabilityVector &predicted) {
  require_same_dim(target.num_classes(), predicted.size(), "cross_entropy");
  double loss = 0.0;
  for (std::size_t j = 0; j < predicted.size(); ++j) {
    const double w = target.weight(j);
    if (w == 0.0) continue;
    loss -= w * std::log(std::max(predicted[j], kLogFloor));
  }
  return loss;
}

double cross_entropy_with_grad(const LabelTarget &target, std::span<const double> logits,
                               std::span<double> dlogits) {
  require_same_dim(target.num_classes(), logits.size(), "cross_entropy_with_grad");
  require_same_dim(logits.size(), dlogits.size(), "cross_entropy_with_grad");
  const ProbabilityVector p = softmax(logits);
  for (std::size_t j = 0; j < logits.size(); ++j) dlogits[j] = p[j] - target.weight(j);
  return cross_entropy(target, p);
}

} // namespace ratio
