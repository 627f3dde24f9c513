#include "ratio/data.hpp"

#include "ratio/binary_io.hpp"
#include "ratio/error.hpp"
#include "ratio/rng.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace ratio {

namespace {

template <class... Ts> struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> overloaded(Ts...) -> overloaded<Ts...>;

void require_positive(std::size_t n, const char *what) {
  if (n == 0) throw InvalidArgument(std::string(what) + ": n must be positive");
}

DenseVector to_unit(double vx, double vy, double canvas) {
  const double s = 2.0 * canvas;
  return DenseVector{std::clamp((vx + canvas) / s, 0.0, 1.0),
                     std::clamp((vy + canvas) / s, 0.0, 1.0)};
}

PointSet gen_mixture(const GaussianMixture2D &g, Rng &rng) {
  require_positive(g.n, "GaussianMixture2D");
  if (g.means.size() < 2) throw InvalidArgument("GaussianMixture2D: need at least 2 means");
  if (!(g.canvas > 0.0)) throw InvalidArgument("GaussianMixture2D: canvas must be > 0");
  const double a = g.cov[0], b = g.cov[1], c = g.cov[2];
  if (!(a > 0.0) || !(a * c - b * b > 0.0))
    throw InvalidArgument("GaussianMixture2D: covariance must be positive definite");
  // Cholesky factor of [[a b][b c]]
  const double l11 = std::sqrt(a), l21 = b / l11, l22 = std::sqrt(c - l21 * l21);

  PointSet out;
  out.dim = 2;
  for (std::size_t i = 0; i < g.n; ++i) {
    const std::size_t k = rng.below(g.means.size());
    const double e1 = rng.normal(), e2 = rng.normal();
    const double vx = g.means[k][0] + l11 * e1;
    const double vy = g.means[k][1] + l21 * e1 + l22 * e2;
    out.points.push_back(to_unit(vx, vy, g.canvas));
    out.labels.push_back(k);
  }
  return out;
}

PointSet gen_rings(const Rings2D &r, Rng &rng) {
  require_positive(r.n, "Rings2D");
  if (!(r.inner_radius >= 0.0 && r.outer_radius > r.inner_radius))
    throw InvalidArgument("Rings2D: need 0 <= inner_radius < outer_radius");
  PointSet out;
  out.dim = 2;
  const double a2 = r.inner_radius * r.inner_radius, b2 = r.outer_radius * r.outer_radius;
  if (!(r.canvas > 0.0) || !(r.inner_radius < r.canvas * std::numbers::sqrt2))
    throw InvalidArgument("Rings2D: annulus does not meet the canvas");
  while (out.points.size() < r.n) {
    const double rad = std::sqrt(rng.uniform(a2, b2)); // uniform over the annulus area
    const double ang = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double vx = rad * std::cos(ang), vy = rad * std::sin(ang);
    if (std::abs(vx) > r.canvas || std::abs(vy) > r.canvas) continue; // redraw off-canvas points
    out.points.push_back(to_unit(vx, vy, r.canvas));
  }
  return out;
}

PointSet gen_uniform(const Shape &shape, std::size_t n, Rng &rng) {
  require_positive(n, "UniformNoise");
  if (shape.size() == 0) throw InvalidArgument("UniformNoise: empty shape");
  PointSet out;
  out.dim = shape.size();
  for (std::size_t i = 0; i < n; ++i) {
    DenseVector v(out.dim);
    for (double &x : v) x = rng.uniform();
    out.points.push_back(std::move(v));
  }
  return out;
}

void box_blur(const Shape &s, std::size_t k, DenseVector &v) {
  const std::size_t r = k / 2;
  DenseVector src = v;
  for (std::size_t c = 0; c < s.channels; ++c)
    for (std::size_t y = 0; y < s.height; ++y)
      for (std::size_t x = 0; x < s.width; ++x) {
        const std::size_t y0 = y >= r ? y - r : 0, y1 = std::min(s.height, y0 + k);
        const std::size_t x0 = x >= r ? x - r : 0, x1 = std::min(s.width, x0 + k);
        double sum = 0.0;
        for (std::size_t yy = y0; yy < y1; ++yy)
          for (std::size_t xx = x0; xx < x1; ++xx) sum += src[(c * s.height + yy) * s.width + xx];
        v[(c * s.height + y) * s.width + x] = sum / static_cast<double>((y1 - y0) * (x1 - x0));
      }
}

PointSet gen_smoothed(const SmoothedNoise &sn, Rng &rng) {
  if (sn.kernel == 0) throw InvalidArgument("SmoothedNoise: kernel must be >= 1");
  PointSet out = gen_uniform(sn.shape, sn.n, rng);
  if (sn.kernel == 1) return out;
  for (DenseVector &v : out.points) {
    box_blur(sn.shape, sn.kernel, v);
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double mn = *lo, range = *hi - *lo;
    for (double &x : v) x = range > 0.0 ? (x - mn) / range : 0.5;
  }
  return out;
}

[[noreturn]] void parse_fail(std::size_t offset, const std::string &msg) {
  throw ParseError(offset, "raw dataset: " + msg);
}

} // namespace

PointSet PointSet::subset(std::span<const std::size_t> indices) const {
  PointSet out;
  out.dim = dim;
  for (std::size_t i : indices) {
    out.points.push_back(points.at(i));
    if (labeled()) out.labels.push_back(labels[i]);
  }
  return out;
}

PointSet PointSet::unlabeled() const {
  PointSet out = *this;
  out.labels.clear();
  return out;
}

PointSet generate(const DatasetSpec &spec) {
  Rng rng(spec.seed);
  return std::visit(overloaded{[&](const GaussianMixture2D &g) { return gen_mixture(g, rng); },
                               [&](const Rings2D &r) { return gen_rings(r, rng); },
                               [&](const RawTensorDir &r) { return load_raw(r.path); },
                               [&](const UniformNoise &u) { return gen_uniform(u.shape, u.n, rng); },
                               [&](const SmoothedNoise &s) { return gen_smoothed(s, rng); }},
                    spec.kind);
}

double mixture_core_radius(const GaussianMixture2D &mix) {
  const double a = mix.cov[0], b = mix.cov[1], c = mix.cov[2];
  const double lambda_max = 0.5 * (a + c) + std::sqrt(0.25 * (a - c) * (a - c) + b * b);
  const double sigma = std::sqrt(lambda_max);
  double r = 0.0;
  for (const auto &m : mix.means) r = std::max(r, std::hypot(m[0], m[1]) + 3.0 * sigma);
  return r;
}

void SplitSpec::validate() const {
  if (train < 0.0 || val < 0.0 || test < 0.0 || std::abs(train + val + test - 1.0) > 1e-9)
    throw InvalidArgument("split: fractions must be non-negative and sum to 1");
}

Splits split(const PointSet &set, const SplitSpec &spec) {
  spec.validate();
  Rng rng(spec.seed);
  const std::vector<std::size_t> perm = rng.permutation(set.size());
  const auto n = static_cast<double>(set.size());
  const auto n_train = static_cast<std::size_t>(std::floor(n * spec.train));
  const auto n_val = std::min(set.size() - n_train, static_cast<std::size_t>(std::floor(n * spec.val)));
  const std::span<const std::size_t> all(perm);
  return {set.subset(all.subspan(0, n_train)), set.subset(all.subspan(n_train, n_val)),
          set.subset(all.subspan(n_train + n_val))};
}

void write_raw(const std::filesystem::path &dir, const PointSet &set) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream h(dir / kRawHeaderFile, std::ios::binary | std::ios::trunc);
    h << "RATIO-DATA v1\n"
      << "n=" << set.size() << " d=" << set.dim << " labeled=" << (set.labeled() ? 1 : 0) << '\n';
    if (!h) throw std::runtime_error("write_raw: cannot write header in " + dir.string());
  }
  std::ofstream d(dir / kRawDataFile, std::ios::binary | std::ios::trunc);
  for (const DenseVector &p : set.points)
    for (double v : p) detail::write_f64(d, v);
  for (std::size_t y : set.labels) detail::write_i32(d, static_cast<std::int32_t>(y));
  if (!d) throw std::runtime_error("write_raw: cannot write payload in " + dir.string());
}

PointSet load_raw(const std::filesystem::path &dir) {
  std::ifstream h(dir / kRawHeaderFile, std::ios::binary);
  if (!h) throw std::runtime_error("raw dataset: cannot open " + (dir / kRawHeaderFile).string());
  std::string magic, fields;
  if (!std::getline(h, magic) || magic != "RATIO-DATA v1") parse_fail(0, "bad magic line");
  const std::size_t fields_offset = magic.size() + 1;
  if (!std::getline(h, fields)) parse_fail(fields_offset, "missing field line");

  std::size_t n = 0, d = 0, labeled = 2;
  bool seen_n = false, seen_d = false;
  std::size_t pos = 0;
  while (pos < fields.size()) {
    while (pos < fields.size() && fields[pos] == ' ') ++pos;
    if (pos >= fields.size()) break;
    const std::size_t end = std::min(fields.find(' ', pos), fields.size());
    const std::string_view tok(fields.data() + pos, end - pos);
    const std::size_t eq = tok.find('=');
    if (eq == std::string_view::npos) parse_fail(fields_offset + pos, "expected key=value");
    const std::string_view key = tok.substr(0, eq), val = tok.substr(eq + 1);
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc{} || ptr != val.data() + val.size())
      parse_fail(fields_offset + pos + eq + 1, "bad integer '" + std::string(val) + "'");
    if (key == "n") n = v, seen_n = true;
    else if (key == "d") d = v, seen_d = true;
    else if (key == "labeled") labeled = v;
    else parse_fail(fields_offset + pos, "unknown key '" + std::string(key) + "'");
    pos = end;
  }
  if (!seen_n || !seen_d || labeled > 1) parse_fail(fields_offset, "need n, d and labeled=0|1");
  if (d == 0) parse_fail(fields_offset, "d must be positive");

  std::ifstream in(dir / kRawDataFile, std::ios::binary);
  if (!in) throw std::runtime_error("raw dataset: cannot open " + (dir / kRawDataFile).string());
  PointSet out;
  out.dim = d;
  std::size_t offset = 0;
  for (std::size_t i = 0; i < n; ++i) {
    DenseVector p(d);
    for (std::size_t j = 0; j < d; ++j) {
      if (!detail::read_f64(in, p[j])) parse_fail(offset, "truncated payload");
      if (!(p[j] >= 0.0 && p[j] <= 1.0))
        parse_fail(offset, "value " + std::to_string(p[j]) + " outside [0,1]");
      offset += 8;
    }
    out.points.push_back(std::move(p));
  }
  if (labeled == 1) {
    for (std::size_t i = 0; i < n; ++i) {
      std::int32_t y = 0;
      if (!detail::read_i32(in, y)) parse_fail(offset, "truncated label block");
      if (y < 0) parse_fail(offset, "negative label");
      out.labels.push_back(static_cast<std::size_t>(y));
      offset += 4;
    }
  }
  if (in.peek() != std::char_traits<char>::eof()) parse_fail(offset, "trailing bytes after payload");
  return out;
}

} // namespace ratio
