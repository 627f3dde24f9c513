#pragma once

#include "ratio/attacks.hpp"
#include "ratio/classifier.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace ratio {

struct CounterfactualRequest {
  DenseVector x;
  /// Class whose confidence is maximized; empty means the class predicted at x.
  std::optional<std::size_t> target;
  /// Increasing l2 budgets.
  std::vector<double> budgets{0.5, 1.0, 1.5, 2.0, 2.5, 3.0};
  PgdConfig attack{.steps = 500, .step_size = 0.1, .momentum = 0.9, .restarts = 1};
};

struct CounterfactualStep {
  double budget = 0.0;
  DenseVector z;
  double confidence = 0.0; // p_t(z)
  std::size_t predicted = 0;
};

struct CounterfactualResult {
  DenseVector x;
  std::size_t source = 0; // argmax at x
  std::size_t target = 0;
  double clean_confidence = 0.0; // p_t(x)
  std::vector<CounterfactualStep> steps;
};

/// Sweeps the budgets in order, warm-starting each maximize_confidence from
/// the previous solution. Budget b uses seed derive_seed(attack.seed, {b}).
CounterfactualResult generate(const CounterfactualRequest &req, const Classifier &model);

/// generate() with the target fixed to the class predicted at x.
CounterfactualResult feature_generation_ood(const DenseVector &x, const Classifier &model,
                                            std::vector<double> budgets, const PgdConfig &attack);

/// Image layout of a flat vector: channel-major (C, H, W), C in {1, 3}.
struct ImageGeometry {
  std::size_t height = 0;
  std::size_t width = 0;
  std::size_t channels = 1;
};

struct PpmImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb; // row-major, 3 bytes per pixel
};

/// clamp to [0,1], then floor(v * 255 + 0.5).
std::uint8_t quantize(double v);

/// One row per result: the original followed by one tile per budget, tiles
/// separated by 1-pixel white columns and rows by 1-pixel white rows.
PpmImage render_grid(const std::vector<CounterfactualResult> &results, const ImageGeometry &geom);

void write_ppm(const std::filesystem::path &path, const PpmImage &img);
PpmImage read_ppm(const std::filesystem::path &path);

/// row,budget,target_class,confidence,predicted_class; the original tile is
/// reported with budget 0.
std::string grid_annotations_csv(const std::vector<CounterfactualResult> &results);

/// Writes `path` (P6) and the annotation sidecar next to it (extension .csv).
/// Returns the sidecar path.
std::filesystem::path emit_grid(const std::vector<CounterfactualResult> &results,
                                const ImageGeometry &geom, const std::filesystem::path &path);

/// Non-image data: the annotation columns followed by the coordinates z_0..z_{d-1}.
std::string trajectory_csv(const std::vector<CounterfactualResult> &results);

} // namespace ratio
