#pragma once

#include "ratio/architecture.hpp"
#include "ratio/tensor.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace ratio {

/// Points in [0,1]^d, optionally labeled.
struct PointSet {
  std::size_t dim = 0;
  std::vector<DenseVector> points;
  std::vector<std::size_t> labels; // empty when unlabeled

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }
  bool labeled() const noexcept { return !labels.empty(); }

  PointSet subset(std::span<const std::size_t> indices) const;
  /// Same points with labels dropped.
  PointSet unlabeled() const;

  friend bool operator==(const PointSet &, const PointSet &) = default;
};

// 2D kinds are drawn in raw coordinates v in [-canvas, canvas]^2 and mapped
// into the unit square by u = (v + canvas) / (2 canvas), then clamped.

/// K labeled Gaussian clusters with a shared covariance; labels uniform.
struct GaussianMixture2D {
  std::vector<std::array<double, 2>> means;
  std::array<double, 3> cov{0.1, 0.0, 0.1}; // (xx, xy, yy)
  std::size_t n = 0;
  double canvas = 4.0;
};

/// Unlabeled annulus centered at the origin of the raw canvas, restricted to
/// the canvas (off-canvas draws are rejected and redrawn).
struct Rings2D {
  std::size_t n = 0;
  double inner_radius = 2.8;
  double outer_radius = 3.8;
  double canvas = 4.0;
};

struct RawTensorDir {
  std::filesystem::path path;
};

/// i.i.d. uniform [0,1] values.
struct UniformNoise {
  Shape shape;
  std::size_t n = 0;
};

/// Uniform noise blurred per channel by a normalized k x k box kernel
/// (window clipped at the borders), then min-max rescaled per sample into
/// [0,1]. k = 1 is the identity and returns the uniform draw unchanged.
struct SmoothedNoise {
  Shape shape;
  std::size_t n = 0;
  std::size_t kernel = 3;
};

using DatasetKind = std::variant<GaussianMixture2D, Rings2D, RawTensorDir, UniformNoise, SmoothedNoise>;

struct DatasetSpec {
  DatasetKind kind;
  std::uint64_t seed = 0;
};

PointSet generate(const DatasetSpec &spec);

/// Largest distance from the raw origin of any mixture core (mean + 3 sigma).
double mixture_core_radius(const GaussianMixture2D &mix);

struct SplitSpec {
  double train = 0.6;
  double val = 0.2;
  double test = 0.2;
  std::uint64_t seed = 0;

  void validate() const;
};

struct Splits {
  PointSet train;
  PointSet val;
  PointSet test;
};

/// Disjoint, exhaustive split by a seeded permutation. Sizes are
/// floor(n*train), floor(n*val) and the remainder.
Splits split(const PointSet &set, const SplitSpec &spec);

/// Raw tensor directory: `header.txt` and `data.bin` (docs/formats.md).
void write_raw(const std::filesystem::path &dir, const PointSet &set);
PointSet load_raw(const std::filesystem::path &dir);

inline constexpr const char *kRawHeaderFile = "header.txt";
inline constexpr const char *kRawDataFile = "data.bin";

} // namespace ratio
