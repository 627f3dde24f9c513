#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace ratio {

/// Fixed-dimension real vector. Inputs live in [0,1]^d after projection.
class DenseVector {
public:
  DenseVector() = default;
  explicit DenseVector(std::size_t dim, double fill = 0.0) : values_(dim, fill) {}
  explicit DenseVector(std::vector<double> values) : values_(std::move(values)) {}
  DenseVector(std::initializer_list<double> values) : values_(values) {}
  explicit DenseVector(std::span<const double> values)
      : values_(values.begin(), values.end()) {}

  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  double &operator[](std::size_t i) { return values_[i]; }
  double operator[](std::size_t i) const { return values_[i]; }

  double *data() noexcept { return values_.data(); }
  const double *data() const noexcept { return values_.data(); }

  std::span<double> span() noexcept { return values_; }
  std::span<const double> span() const noexcept { return values_; }
  operator std::span<const double>() const noexcept { return values_; }

  auto begin() noexcept { return values_.begin(); }
  auto end() noexcept { return values_.end(); }
  auto begin() const noexcept { return values_.begin(); }
  auto end() const noexcept { return values_.end(); }

  const std::vector<double> &values() const & noexcept { return values_; }
  std::vector<double> values() && noexcept { return std::move(values_); }

  friend bool operator==(const DenseVector &, const DenseVector &) = default;

private:
  std::vector<double> values_;
};

/// Row-major real matrix; rows are batch entries.
class Matrix {
public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const {
    return {data_.data() + r * cols_, cols_};
  }

  double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<const double> flat() const noexcept { return data_; }

  friend bool operator==(const Matrix &, const Matrix &) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

void require_same_dim(std::size_t a, std::size_t b, const char *what);

double dot(std::span<const double> a, std::span<const double> b);
double norm2(std::span<const double> a);
double norm_inf(std::span<const double> a);
double distance(std::span<const double> a, std::span<const double> b, bool l2);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> a);

bool in_unit_box(std::span<const double> a, double tol = 0.0);

} // namespace ratio
