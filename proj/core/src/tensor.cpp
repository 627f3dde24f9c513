#include "ratio/tensor.hpp"

#include "ratio/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ratio {

void require_same_dim(std::size_t a, std::size_t b, const char *what) {
  if (a != b) {
    throw InvalidArgument(std::string(what) + ": dimension mismatch (" +
                          std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

double dot(std::span<const double> a, std::span<const double> b) {
  require_same_dim(a.size(), b.size(), "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm2(std::span<const double> a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

double norm_inf(std::span<const double> a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

double distance(std::span<const double> a, std::span<const double> b, bool l2) {
  require_same_dim(a.size(), b.size(), "distance");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    acc = l2 ? acc + d * d : std::max(acc, std::abs(d));
  }
  return l2 ? std::sqrt(acc) : acc;
}

std::size_t argmax(std::span<const double> a) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < a.size(); ++i)
    if (a[i] > a[best]) best = i;
  return best;
}

bool in_unit_box(std::span<const double> a, double tol) {
  return std::all_of(a.begin(), a.end(),
                     [tol](double v) { return v >= -tol && v <= 1.0 + tol; });
}

} // namespace ratio
