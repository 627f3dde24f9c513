#include "ratio/threat_model.hpp"

#include "ratio/error.hpp"

#include <algorithm>
#include <cmath>

namespace ratio {

std::string_view to_string(Norm n) { return n == Norm::L2 ? "l2" : "linf"; }

Norm parse_norm(std::string_view s) {
  if (s == "l2" || s == "L2") return Norm::L2;
  if (s == "linf" || s == "Linf" || s == "LINF") return Norm::Linf;
  throw InvalidArgument("unknown norm '" + std::string(s) + "' (expected l2 or linf)");
}

ThreatModel::ThreatModel(Norm n, double eps) : norm(n), epsilon(eps) {
  if (!(eps >= 0.0)) throw InvalidArgument("ThreatModel: epsilon must be >= 0");
}

bool ThreatModel::contains(std::span<const double> z, std::span<const double> x,
                           double tol) const {
  require_same_dim(z.size(), x.size(), "ThreatModel::contains");
  return distance(z, x, norm == Norm::L2) <= epsilon + tol && in_unit_box(z, tol);
}

namespace {

void clamp_box(std::span<double> z) {
  for (double &v : z) v = std::clamp(v, 0.0, 1.0);
}

void project_l2_ball(std::span<double> z, std::span<const double> x, double eps) {
  double n2 = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    const double d = z[i] - x[i];
    n2 += d * d;
  }
  const double n = std::sqrt(n2);
  if (n <= eps) return;
  const double s = eps / n;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = x[i] + s * (z[i] - x[i]);
}

} // namespace

void project_in_place(std::span<double> z, std::span<const double> x, const ThreatModel &tm) {
  require_same_dim(z.size(), x.size(), "project_threat_model");
  if (tm.norm == Norm::Linf) {
    for (std::size_t i = 0; i < z.size(); ++i)
      z[i] = std::clamp(std::clamp(z[i], x[i] - tm.epsilon, x[i] + tm.epsilon), 0.0, 1.0);
    return;
  }

  std::vector<double> prev(z.begin(), z.end());
  for (int round = 0; round < kMaxProjectionRounds; ++round) {
    project_l2_ball(z, x, tm.epsilon);
    clamp_box(z);
    double moved = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
      moved = std::max(moved, std::abs(z[i] - prev[i]));
      prev[i] = z[i];
    }
    if (moved < kProjectionTolerance) break;
  }
  // Box projection ran last. If the ball is still violated (slow alternating
  // convergence), pull toward x: the segment x..z stays inside the box.
  project_l2_ball(z, x, tm.epsilon);
}

DenseVector project_threat_model(const DenseVector &z, const DenseVector &x,
                                 const ThreatModel &tm) {
  DenseVector out = z;
  project_in_place(out.span(), x.span(), tm);
  return out;
}

} // namespace ratio
