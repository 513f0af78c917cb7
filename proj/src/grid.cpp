#include "inpaintopt/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

namespace {

void check_dims(int width, int height) {
  if (width <= 0 || height <= 0) {
    throw ValidationError("grid dimensions must be positive, got " + std::to_string(width) +
                          "x" + std::to_string(height));
  }
}

}  // namespace

Image::Image(int width, int height, double fill) : width_(width), height_(height) {
  check_dims(width, height);
  values_.assign(static_cast<std::size_t>(width) * height, fill);
}

Image::Image(int width, int height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  check_dims(width, height);
  if (values_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("image value count does not match its dimensions");
  }
  for (double v : values_) {
    if (!std::isfinite(v)) throw ValidationError("image values must be finite");
  }
}

double Image::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) / static_cast<double>(size());
}

double Image::min() const { return *std::min_element(values_.begin(), values_.end()); }

double Image::max() const { return *std::max_element(values_.begin(), values_.end()); }

Mask::Mask(int width, int height, bool fill) : width_(width), height_(height) {
  check_dims(width, height);
  bits_.assign(static_cast<std::size_t>(width) * height, fill ? 1 : 0);
}

Mask::Mask(int width, int height, std::vector<std::uint8_t> bits)
    : width_(width), height_(height), bits_(std::move(bits)) {
  check_dims(width, height);
  if (bits_.size() != static_cast<std::size_t>(width) * height) {
    throw ValidationError("mask bit count does not match its dimensions");
  }
  for (auto& b : bits_) b = b ? 1 : 0;
}

std::size_t Mask::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> Mask::indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (bits_[i]) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Mask::complement_indices() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < bits_.size(); ++i) {
    if (!bits_[i]) out.push_back(i);
  }
  return out;
}

double mse(const Image& u, const Image& f) {
  if (!u.same_shape(f)) throw ValidationError("mse: dimension mismatch");
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double d = f[i] - u[i];
    sum += d * d;
  }
  return sum / static_cast<double>(u.size());
}

int mirror_index(int i, int n) {
  if (n == 1) return 0;
  const int period = 2 * n;
  int m = i % period;
  if (m < 0) m += period;
  return m < n ? m : period - 1 - m;
}

Image gaussian_smooth(const Image& f, double sigma) {
  if (!(sigma >= 0.0)) throw ValidationError("gaussian_smooth: sigma must be nonnegative");
  if (sigma == 0.0) return f;

  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
  }
  const double total = std::accumulate(kernel.begin(), kernel.end(), 0.0);
  for (double& w : kernel) w /= total;

  const int w = f.width();
  const int h = f.height();
  Image tmp(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * f.at(mirror_index(x + k, w), y);
      }
      tmp.at(x, y) = acc;
    }
  }
  Image out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp.at(x, mirror_index(y + k, h));
      }
      out.at(x, y) = acc;
    }
  }
  return out;
}

}  // namespace inpaintopt
