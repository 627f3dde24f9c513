#include "ratio/checkpoint.hpp"

#include "ratio/binary_io.hpp"
#include "ratio/error.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <string>

namespace ratio {

namespace {

constexpr std::string_view kMagic = "RATIO-CKPT\n";
constexpr std::string_view kVersionTag = "v1 ";

} // namespace

void write_checkpoint(std::ostream &out, const Classifier &model) {
  out << kMagic << kVersionTag << model.architecture().descriptor() << '\n'
      << model.num_params() << '\n';
  for (double p : model.params()) detail::write_f64(out, p);
  if (!out) throw std::runtime_error("write_checkpoint: stream error");
}

Classifier read_checkpoint(std::istream &in) {
  std::size_t offset = 0;
  std::string line;

  std::array<char, kMagic.size()> magic{};
  if (!in.read(magic.data(), magic.size()) ||
      std::string_view(magic.data(), magic.size()) != kMagic)
    throw ParseError(0, "checkpoint: bad magic");
  offset += kMagic.size();

  if (!std::getline(in, line) || line.rfind(kVersionTag, 0) != 0)
    throw ParseError(offset, "checkpoint: unsupported version line");
  const Architecture arch = Architecture::parse(std::string_view(line).substr(kVersionTag.size()));
  offset += line.size() + 1;

  if (!std::getline(in, line)) throw ParseError(offset, "checkpoint: missing parameter count");
  std::size_t count = 0;
  const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), count);
  if (ec != std::errc{} || ptr != line.data() + line.size())
    throw ParseError(offset, "checkpoint: bad parameter count '" + line + "'");
  if (count != arch.num_params())
    throw ParseError(offset, "checkpoint: parameter count does not match architecture");
  offset += line.size() + 1;

  std::vector<double> params(count);
  for (std::size_t i = 0; i < count; ++i) {
    if (!detail::read_f64(in, params[i]))
      throw ParseError(offset + 8 * i, "checkpoint: truncated parameter payload");
  }
  return Classifier(arch, std::move(params));
}

void save_checkpoint(const std::filesystem::path &path, const Classifier &model) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_checkpoint(out, model);
}

Classifier load_checkpoint(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

} // namespace ratio
