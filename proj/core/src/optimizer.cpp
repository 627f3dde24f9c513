#include "ratio/optimizer.hpp"

#include "ratio/error.hpp"
#include "ratio/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace ratio {

void OptimizerConfig::validate() const {
  if (!(base_lr > 0.0)) throw InvalidArgument("optimizer: base_lr must be > 0");
  if (!(momentum >= 0.0 && momentum < 1.0))
    throw InvalidArgument("optimizer: momentum must lie in [0, 1)");
  if (!(weight_decay >= 0.0)) throw InvalidArgument("optimizer: weight_decay must be >= 0");
  if (!(lr_decay_factor > 0.0)) throw InvalidArgument("optimizer: lr_decay_factor must be > 0");
  double prev = 0.0;
  for (double m : decay_milestones) {
    if (!(m > prev && m < 1.0))
      throw InvalidArgument("optimizer: milestones must be strictly increasing in (0, 1)");
    prev = m;
  }
}

void sgd_step(std::span<double> params, std::span<const double> grads, SgdState &state,
              const OptimizerConfig &cfg, double lr) {
  require_same_dim(params.size(), grads.size(), "sgd_step");
  if (state.velocity.empty()) state.velocity.assign(params.size(), 0.0);
  require_same_dim(params.size(), state.velocity.size(), "sgd_step");
  const double beta = cfg.momentum;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i] + cfg.weight_decay * params[i];
    double &v = state.velocity[i];
    v = beta * v - lr * g;
    params[i] = params[i] + beta * v - lr * g;
  }
}

LrSchedule::LrSchedule(const OptimizerConfig &cfg, std::size_t total_epochs)
    : base_lr_(cfg.base_lr), factor_(cfg.lr_decay_factor) {
  cfg.validate();
  for (double m : cfg.decay_milestones)
    milestones_.push_back(static_cast<std::size_t>(std::lround(m * static_cast<double>(total_epochs))));
}

std::size_t LrSchedule::decay_events(std::size_t epoch) const {
  return static_cast<std::size_t>(
      std::count_if(milestones_.begin(), milestones_.end(), [epoch](std::size_t m) { return m <= epoch; }));
}

double LrSchedule::lr_at(std::size_t epoch) const {
  return base_lr_ * std::pow(factor_, static_cast<double>(decay_events(epoch)));
}

} // namespace ratio
