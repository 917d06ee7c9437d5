#include "c2bnet/matrix.hpp"

#include <cmath>
#include <stdexcept>

namespace c2bnet::numkit {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw std::invalid_argument("Matrix: data length does not match rows*cols");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

std::vector<double> Matrix::row_copy(std::size_t i) const {
  return {row(i), row(i) + cols_};
}

void Matrix::set_row(std::size_t i, const std::vector<double>& v) {
  if (v.size() != cols_)
    throw std::invalid_argument("Matrix::set_row: length mismatch");
  double* dst = row(i);
  for (std::size_t j = 0; j < cols_; ++j) dst[j] = v[j];
}

bool Matrix::all_finite() const {
  for (double v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void Matrix::fill(double v) {
  for (double& x : data_) x = v;
}

} // namespace c2bnet::numkit
