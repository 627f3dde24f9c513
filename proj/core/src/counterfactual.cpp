#include "ratio/counterfactual.hpp"

#include "ratio/error.hpp"
#include "ratio/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace ratio {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

constexpr std::uint8_t kWhite = 255;

} // namespace

CounterfactualResult generate(const CounterfactualRequest &req, const Classifier &model) {
  require_same_dim(req.x.size(), model.input_dim(), "counterfactual");
  if (!in_unit_box(req.x.span())) throw InvalidArgument("counterfactual: x must lie in [0,1]^d");
  for (std::size_t i = 0; i < req.budgets.size(); ++i) {
    if (!(req.budgets[i] >= 0.0)) throw InvalidArgument("counterfactual: budgets must be >= 0");
    if (i > 0 && !(req.budgets[i] > req.budgets[i - 1]))
      throw InvalidArgument("counterfactual: budgets must be strictly increasing");
  }

  CounterfactualResult out;
  out.x = req.x;
  out.source = model.predict(req.x.span());
  out.target = req.target.value_or(out.source);
  if (out.target >= model.num_classes()) throw InvalidArgument("counterfactual: target out of range");
  const auto conf = [&](const DenseVector &z) { return softmax(model.logits(z.span()))[out.target]; };
  out.clean_confidence = conf(req.x);

  DenseVector prev = req.x;
  double prev_conf = out.clean_confidence;
  for (std::size_t b = 0; b < req.budgets.size(); ++b) {
    PgdConfig run = req.attack;
    run.seed = derive_seed(req.attack.seed, {b});
    const AttackResult res = maximize_confidence(model, req.x, ThreatModel::l2(req.budgets[b]),
                                                 ConfidenceTarget::of(out.target), run, prev.span());
    if (res.score >= prev_conf) {
      prev = res.z_best;
      prev_conf = res.score;
    }
    out.steps.push_back({req.budgets[b], prev, prev_conf, model.predict(prev.span())});
  }
  return out;
}

CounterfactualResult feature_generation_ood(const DenseVector &x, const Classifier &model,
                                            std::vector<double> budgets, const PgdConfig &attack) {
  CounterfactualRequest req;
  req.x = x;
  req.target = std::nullopt;
  req.budgets = std::move(budgets);
  req.attack = attack;
  return generate(req, model);
}

std::uint8_t quantize(double v) {
  return static_cast<std::uint8_t>(std::floor(std::clamp(v, 0.0, 1.0) * 255.0 + 0.5));
}

PpmImage render_grid(const std::vector<CounterfactualResult> &results, const ImageGeometry &g) {
  if (g.height == 0 || g.width == 0 || (g.channels != 1 && g.channels != 3))
    throw InvalidArgument("emit_grid: geometry must be H x W or H x W x 3");
  const std::size_t plane = g.height * g.width;
  std::size_t tiles = 0;
  for (const CounterfactualResult &r : results) {
    if (r.x.size() != plane * g.channels)
      throw InvalidArgument("emit_grid: input is not image-shaped for the given geometry");
    tiles = std::max(tiles, r.steps.size() + 1);
  }
  if (results.empty()) throw InvalidArgument("emit_grid: no results");

  PpmImage img;
  img.width = tiles * g.width + (tiles - 1);
  img.height = results.size() * g.height + (results.size() - 1);
  img.rgb.assign(img.width * img.height * 3, kWhite);

  const auto blit = [&](const DenseVector &v, std::size_t row, std::size_t tile) {
    const std::size_t ox = tile * (g.width + 1), oy = row * (g.height + 1);
    for (std::size_t y = 0; y < g.height; ++y)
      for (std::size_t x = 0; x < g.width; ++x)
        for (std::size_t c = 0; c < 3; ++c) {
          const std::size_t src = (g.channels == 3 ? c : 0) * plane + y * g.width + x;
          img.rgb[((oy + y) * img.width + ox + x) * 3 + c] = quantize(v[src]);
        }
  };
  for (std::size_t r = 0; r < results.size(); ++r) {
    blit(results[r].x, r, 0);
    for (std::size_t s = 0; s < results[r].steps.size(); ++s) {
      if (results[r].steps[s].z.size() != results[r].x.size())
        throw InvalidArgument("emit_grid: tile dimension mismatch");
      blit(results[r].steps[s].z, r, s + 1);
    }
  }
  return img;
}

void write_ppm(const std::filesystem::path &path, const PpmImage &img) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << "P6\n" << img.width << ' ' << img.height << "\n255\n";
  out.write(reinterpret_cast<const char *>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size()));
  if (!out) throw std::runtime_error("write_ppm: stream error on " + path.string());
}

PpmImage read_ppm(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  std::size_t w = 0, h = 0, maxval = 0;
  if (!(in >> magic) || magic != "P6") throw ParseError(0, "ppm: expected P6");
  if (!(in >> w >> h >> maxval) || maxval != 255)
    throw ParseError(static_cast<std::size_t>(std::max<std::streamoff>(in.tellg(), 0)),
                     "ppm: bad header");
  in.get(); // single whitespace before the raster
  PpmImage img{w, h, std::vector<std::uint8_t>(w * h * 3)};
  const std::streamoff raster = in.tellg();
  if (!in.read(reinterpret_cast<char *>(img.rgb.data()), static_cast<std::streamsize>(img.rgb.size())))
    throw ParseError(static_cast<std::size_t>(raster), "ppm: truncated raster");
  return img;
}

std::string grid_annotations_csv(const std::vector<CounterfactualResult> &results) {
  std::ostringstream out;
  out << "row,budget,target_class,confidence,predicted_class\n";
  for (std::size_t r = 0; r < results.size(); ++r) {
    const CounterfactualResult &res = results[r];
    out << r << ',' << fmt(0.0) << ',' << res.target << ',' << fmt(res.clean_confidence) << ','
        << res.source << '\n';
    for (const CounterfactualStep &s : res.steps)
      out << r << ',' << fmt(s.budget) << ',' << res.target << ',' << fmt(s.confidence) << ','
          << s.predicted << '\n';
  }
  return out.str();
}

std::filesystem::path emit_grid(const std::vector<CounterfactualResult> &results,
                                const ImageGeometry &geom, const std::filesystem::path &path) {
  write_ppm(path, render_grid(results, geom));
  std::filesystem::path sidecar = path;
  sidecar.replace_extension(".csv");
  std::ofstream csv(sidecar, std::ios::binary | std::ios::trunc);
  csv << grid_annotations_csv(results);
  if (!csv) throw std::runtime_error("emit_grid: cannot write " + sidecar.string());
  return sidecar;
}

std::string trajectory_csv(const std::vector<CounterfactualResult> &results) {
  std::ostringstream out;
  const std::size_t d = results.empty() ? 0 : results.front().x.size();
  out << "row,budget,target_class,confidence,predicted_class";
  for (std::size_t j = 0; j < d; ++j) out << ",z" << j;
  out << '\n';
  const auto coords = [&](const DenseVector &z) {
    for (double v : z) out << ',' << fmt(v);
    out << '\n';
  };
  for (std::size_t r = 0; r < results.size(); ++r) {
    const CounterfactualResult &res = results[r];
    out << r << ',' << fmt(0.0) << ',' << res.target << ',' << fmt(res.clean_confidence) << ','
        << res.source;
    coords(res.x);
    for (const CounterfactualStep &s : res.steps) {
      out << r << ',' << fmt(s.budget) << ',' << res.target << ',' << fmt(s.confidence) << ','
          << s.predicted;
      coords(s.z);
    }
  }
  return out.str();
}

} // namespace ratio
