#pragma once

#include "ratio/classifier.hpp"

#include <filesystem>
#include <iosfwd>

namespace ratio {

/// Checkpoint layout (docs/formats.md):
///   "RATIO-CKPT\n"
///   "v1 <architecture descriptor>\n"
///   "<parameter count>\n"
///   parameter count x little-endian IEEE-754 binary64
void write_checkpoint(std::ostream &out, const Classifier &model);
Classifier read_checkpoint(std::istream &in);

void save_checkpoint(const std::filesystem::path &path, const Classifier &model);
Classifier load_checkpoint(const std::filesystem::path &path);

} // namespace ratio
