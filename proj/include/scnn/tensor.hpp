#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "scnn/errors.hpp"

namespace scnn {

/// Dense feature-map/weight container, channel-major then row-major:
/// index (c, y, x) maps to data[(c * height + y) * width + x].
template <typename T>
struct TensorT {
  int channels = 0;
  int height = 0;
  int width = 0;
  std::vector<T> data;

  TensorT() = default;
  TensorT(int c, int h, int w, T fill = T(0))
      : channels(c), height(h), width(w),
        data(static_cast<std::size_t>(c) * h * w, fill) {
    if (c < 0 || h < 0 || w < 0) throw ValidationError("tensor dims must be non-negative");
  }

  std::int64_t size() const { return static_cast<std::int64_t>(channels) * height * width; }

  T& at(int c, int y, int x) {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }
  const T& at(int c, int y, int x) const {
    return data[(static_cast<std::size_t>(c) * height + y) * width + x];
  }

  // Value at (c, y, x) with zero padding outside the spatial bounds.
  T at_padded(int c, int y, int x) const {
    if (y < 0 || y >= height || x < 0 || x >= width) return T(0);
    return at(c, y, x);
  }

  bool same_shape(const TensorT& other) const {
    return channels == other.channels && height == other.height && width == other.width;
  }

  std::string shape_str() const {
    return std::to_string(channels) + "x" + std::to_string(height) + "x" + std::to_string(width);
  }

  void require_finite(const std::string& what) const {
    for (const T& v : data)
      if (!std::isfinite(static_cast<double>(v)))
        throw ValidationError(what + ": tensor contains non-finite values");
  }
};

using Tensor = TensorT<float>;
using DTensor = TensorT<double>;  // double-precision oracle outputs

template <typename T, typename U>
TensorT<T> convert_tensor(const TensorT<U>& src) {
  TensorT<T> out(src.channels, src.height, src.width);
  for (std::size_t i = 0; i < src.data.size(); ++i) out.data[i] = static_cast<T>(src.data[i]);
  return out;
}

/// Row-major matrix of single-precision weights (FC layers).
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<float> data;

  Matrix() = default;
  Matrix(int r, int c, float fill = 0.f)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, fill) {}

  float& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  const float& at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
};

}  // namespace scnn
