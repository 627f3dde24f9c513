#include "ratio/architecture.hpp"

#include "ratio/error.hpp"

#include <charconv>
#include <sstream>

namespace ratio {

namespace {

std::size_t parse_size(std::string_view s, std::string_view token) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || v == 0)
    throw InvalidArgument("architecture: bad size in token '" + std::string(token) + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

} // namespace

Architecture Architecture::parse(std::string_view descriptor) {
  std::istringstream in{std::string(descriptor)};
  std::vector<std::string> tokens;
  for (std::string t; in >> t;) tokens.push_back(t);
  if (tokens.empty() || tokens.front().rfind("in=", 0) != 0)
    throw InvalidArgument("architecture: descriptor must start with in=<shape>");

  Architecture arch;
  {
    const auto dims = split(std::string_view(tokens.front()).substr(3), 'x');
    if (dims.size() == 1) {
      arch.input_ = {parse_size(dims[0], tokens.front()), 1, 1};
    } else if (dims.size() == 3) {
      arch.input_ = {parse_size(dims[0], tokens.front()), parse_size(dims[1], tokens.front()),
                     parse_size(dims[2], tokens.front())};
    } else {
      throw InvalidArgument("architecture: input shape must be d or CxHxW");
    }
  }

  Shape cur = arch.input_;
  std::size_t offset = 0;
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string &tok = tokens[i];
    const auto parts = split(tok, ':');
    Layer layer{};
    layer.in = cur;
    if (parts[0] == "dense" && parts.size() == 2) {
      layer.kind = LayerKind::Dense;
      layer.units = parse_size(parts[1], tok);
      layer.out = {layer.units, 1, 1};
      layer.param_count = layer.units * cur.size() + layer.units;
    } else if (parts[0] == "relu" && parts.size() == 1) {
      layer.kind = LayerKind::Relu;
      layer.out = cur;
    } else if (parts[0] == "conv" && parts.size() == 3) {
      layer.kind = LayerKind::Conv;
      layer.units = parse_size(parts[1], tok);
      layer.kernel = parse_size(parts[2], tok);
      if (layer.kernel > cur.height || layer.kernel > cur.width)
        throw InvalidArgument("architecture: kernel larger than input in '" + tok + "'");
      layer.out = {layer.units, cur.height - layer.kernel + 1, cur.width - layer.kernel + 1};
      layer.param_count = layer.units * cur.channels * layer.kernel * layer.kernel + layer.units;
    } else if (parts[0] == "avgpool" && parts.size() == 2) {
      layer.kind = LayerKind::AvgPool;
      layer.kernel = parse_size(parts[1], tok);
      if (cur.height % layer.kernel != 0 || cur.width % layer.kernel != 0)
        throw InvalidArgument("architecture: pool window does not tile input in '" + tok + "'");
      layer.out = {cur.channels, cur.height / layer.kernel, cur.width / layer.kernel};
    } else {
      throw InvalidArgument("architecture: unknown token '" + tok + "'");
    }
    layer.param_offset = offset;
    offset += layer.param_count;
    cur = layer.out;
    arch.layers_.push_back(layer);
  }
  if (arch.layers_.empty() || arch.layers_.back().kind != LayerKind::Dense)
    throw InvalidArgument("architecture: last layer must be dense");
  if (arch.layers_.back().units < 2)
    throw InvalidArgument("architecture: need at least 2 classes");

  arch.num_params_ = offset;
  std::ostringstream canon;
  canon << tokens.front();
  for (std::size_t i = 1; i < tokens.size(); ++i) canon << ' ' << tokens[i];
  arch.descriptor_ = canon.str();
  return arch;
}

Architecture Architecture::mlp(std::size_t input_dim, std::size_t num_classes,
                               std::vector<std::size_t> hidden) {
  std::ostringstream d;
  d << "in=" << input_dim;
  for (std::size_t h : hidden) d << " dense:" << h << " relu";
  d << " dense:" << num_classes;
  return parse(d.str());
}

Architecture Architecture::tiny_conv(std::size_t channels, std::size_t height, std::size_t width,
                                     std::size_t num_classes) {
  // 28x28 -> conv3 26 -> pool2 13 -> conv2 12 -> pool2 6
  // 32x32 -> conv3 30 -> pool2 15 -> conv2 14 -> pool2 7
  std::ostringstream d;
  d << "in=" << channels << 'x' << height << 'x' << width
    << " conv:8:3 relu avgpool:2 conv:16:2 relu avgpool:2 dense:" << num_classes;
  return parse(d.str());
}

} // namespace ratio
