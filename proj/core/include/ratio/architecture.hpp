#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace ratio {

/// Activation shape (channels, height, width). Flat vectors use (d, 1, 1).
struct Shape {
  std::size_t channels = 0;
  std::size_t height = 1;
  std::size_t width = 1;

  std::size_t size() const noexcept { return channels * height * width; }
  friend bool operator==(const Shape &, const Shape &) = default;
};

enum class LayerKind { Dense, Relu, Conv, AvgPool };

struct Layer {
  LayerKind kind;
  std::size_t units = 0;  // Dense: outputs; Conv: output channels
  std::size_t kernel = 0; // Conv: kernel side; AvgPool: window side
  Shape in;
  Shape out;
  std::size_t param_offset = 0;
  std::size_t param_count = 0;
};

/// Resolved layer stack of a classifier.
///
/// Descriptor grammar (whitespace separated):
///   in=<d> | in=<c>x<h>x<w>   input shape, first token
///   dense:<n>                 fully connected, flattens its input
///   relu
///   conv:<channels>:<k>       k x k valid convolution, stride 1
///   avgpool:<k>               non-overlapping k x k average pool
/// The last layer must be dense; its width is the class count.
class Architecture {
public:
  static Architecture parse(std::string_view descriptor);

  /// d -> hidden... -> K with ReLU between dense layers.
  static Architecture mlp(std::size_t input_dim, std::size_t num_classes,
                          std::vector<std::size_t> hidden = {64, 64});

  /// conv -> relu -> pool -> conv -> relu -> pool -> dense for small images.
  static Architecture tiny_conv(std::size_t channels, std::size_t height, std::size_t width,
                                std::size_t num_classes);

  const std::string &descriptor() const noexcept { return descriptor_; }
  const std::vector<Layer> &layers() const noexcept { return layers_; }
  const Shape &input_shape() const noexcept { return input_; }
  std::size_t input_dim() const noexcept { return input_.size(); }
  std::size_t num_classes() const noexcept { return layers_.back().out.size(); }
  std::size_t num_params() const noexcept { return num_params_; }

  friend bool operator==(const Architecture &a, const Architecture &b) {
    return a.descriptor_ == b.descriptor_;
  }

private:
  Architecture() = default;

  std::string descriptor_;
  Shape input_;
  std::vector<Layer> layers_;
  std::size_t num_params_ = 0;
};

} // namespace ratio
