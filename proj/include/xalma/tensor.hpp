#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "xalma/errors.hpp"

namespace xalma {

// Dense row-major tensor of 64-bit floats. Rank 0 (shape {}) is a scalar
// with exactly one element.
struct Tensor {
  std::vector<int> shape;
  std::vector<double> data;
  bool requires_grad = false;
  std::vector<double> grad;  // empty until backward touches this tensor

  Tensor() = default;

  static Tensor zeros(std::vector<int> shape, bool requires_grad = false);
  static Tensor scalar(double v, bool requires_grad = false);
  static Tensor from(std::vector<int> shape, std::vector<double> values,
                     bool requires_grad = false);

  int64_t size() const { return static_cast<int64_t>(data.size()); }
  int rank() const { return static_cast<int>(shape.size()); }

  int rows() const;  // rank-2 helpers
  int cols() const;
  double& at(int r, int c) { return data[static_cast<size_t>(r) * cols() + c]; }
  double at(int r, int c) const {
    return data[static_cast<size_t>(r) * cols() + c];
  }

  void ensure_grad();  // allocate + zero the grad buffer
  void zero_grad();

  bool finite() const;  // every data element is finite
};

int64_t shape_numel(const std::vector<int>& shape);
std::string shape_str(const std::vector<int>& shape);

}  // namespace xalma
