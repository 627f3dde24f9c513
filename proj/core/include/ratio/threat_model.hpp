#pragma once

#include "ratio/tensor.hpp"

#include <span>
#include <string>
#include <string_view>

namespace ratio {

enum class Norm { L2, Linf };

std::string_view to_string(Norm n);
Norm parse_norm(std::string_view s);

/// l_p ball of radius epsilon around x, intersected with [0,1]^d.
struct ThreatModel {
  Norm norm = Norm::L2;
  double epsilon = 0.0;

  ThreatModel() = default;
  ThreatModel(Norm n, double eps);

  static ThreatModel l2(double eps) { return {Norm::L2, eps}; }
  static ThreatModel linf(double eps) { return {Norm::Linf, eps}; }

  /// z in T(x): ||z - x||_p <= epsilon (within tol) and z in the unit box.
  bool contains(std::span<const double> z, std::span<const double> x,
                double tol = 1e-7) const;

  friend bool operator==(const ThreatModel &, const ThreatModel &) = default;
};

inline constexpr int kMaxProjectionRounds = 50;
inline constexpr double kProjectionTolerance = 1e-9;

/// Projection of z onto B_p(x, eps) ∩ [0,1]^d by alternating ball and box
/// projections. x must lie in the box. Exact for Linf; for L2 the fixed point
/// is feasible but not necessarily the nearest point.
DenseVector project_threat_model(const DenseVector &z, const DenseVector &x,
                                 const ThreatModel &tm);

/// In-place variant used by the attack loops.
void project_in_place(std::span<double> z, std::span<const double> x, const ThreatModel &tm);

} // namespace ratio
