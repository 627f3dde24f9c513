#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratio {

/// Non-negative vector over K classes summing to 1 (within 1e-9).
class ProbabilityVector {
public:
  /// Validates non-negativity and normalization.
  explicit ProbabilityVector(std::vector<double> probs);

  std::size_t size() const noexcept { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const noexcept { return probs_; }

  double max() const;
  std::size_t argmax() const;

private:
  struct Unchecked {};
  ProbabilityVector(std::vector<double> probs, Unchecked) : probs_(std::move(probs)) {}
  friend ProbabilityVector softmax(std::span<const double>, double);

  std::vector<double> probs_;
};

/// Training/attack target distribution: one-hot e_y or uniform 1/K.
class LabelTarget {
public:
  enum class Kind { OneHot, Uniform };

  static LabelTarget one_hot(std::size_t y, std::size_t num_classes);
  static LabelTarget uniform(std::size_t num_classes);

  Kind kind() const noexcept { return kind_; }
  std::size_t label() const noexcept { return label_; }
  std::size_t num_classes() const noexcept { return num_classes_; }

  /// Target probability of class j.
  double weight(std::size_t j) const {
    if (kind_ == Kind::Uniform) return 1.0 / static_cast<double>(num_classes_);
    return j == label_ ? 1.0 : 0.0;
  }

  ProbabilityVector materialize() const;

private:
  LabelTarget(Kind kind, std::size_t label, std::size_t k)
      : kind_(kind), label_(label), num_classes_(k) {}

  Kind kind_;
  std::size_t label_;
  std::size_t num_classes_;
};

/// Floor applied to probabilities inside log() in the loss.
inline constexpr double kLogFloor = 1e-12;

/// softmax(logits / temperature), max-subtracted.
ProbabilityVector softmax(std::span<const double> logits, double temperature = 1.0);

/// log softmax(logits), computed stably; writes K values into `out`.
void log_softmax(std::span<const double> logits, std::span<double> out);

/// Non-negative cross-entropy -sum_j p_j log(max(q_j, 1e-12)).
double cross_entropy(const LabelTarget &target, const ProbabilityVector &predicted);

/// Cross-entropy of softmax(logits) against the target, together with its
/// gradient with respect to the logits (softmax - target).
double cross_entropy_with_grad(const LabelTarget &target, std::span<const double> logits,
                               std::span<double> dlogits);

} // namespace ratio
