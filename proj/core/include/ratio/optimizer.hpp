#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace ratio {

/// SGD with Nesterov momentum, weight decay and step-wise decay.
struct OptimizerConfig {
  double base_lr = 0.1;
  double momentum = 0.9;
  double weight_decay = 5e-4;
  double lr_decay_factor = 0.1;
  /// Fractions of the total epoch count; strictly increasing in (0, 1).
  std::vector<double> decay_milestones = {0.5, 0.75, 0.9};

  void validate() const;
};

struct SgdState {
  std::vector<double> velocity;
};

/// g += wd * p;  v <- beta v - lr g;  p <- p + beta v - lr g.
/// Weight decay applies to every parameter, biases included.
void sgd_step(std::span<double> params, std::span<const double> grads, SgdState &state,
              const OptimizerConfig &cfg, double lr);

class LrSchedule {
public:
  LrSchedule(const OptimizerConfig &cfg, std::size_t total_epochs);

  /// Milestone fractions rounded to the nearest epoch index.
  const std::vector<std::size_t> &milestone_epochs() const noexcept { return milestones_; }

  /// Number of milestones at or before `epoch`.
  std::size_t decay_events(std::size_t epoch) const;
  double lr_at(std::size_t epoch) const;

private:
  double base_lr_;
  double factor_;
  std::vector<std::size_t> milestones_;
};

} // namespace ratio
