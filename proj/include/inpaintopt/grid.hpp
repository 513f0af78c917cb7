#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace inpaintopt {

// Dense row-major grid of grey values. 1D signals are stored with height 1.
class Image {
 public:
  Image() = default;
  Image(int width, int height, double fill = 0.0);
  Image(int width, int height, std::vector<double> values);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  double at(int x, int y) const { return values_[index(x, y)]; }
  double& at(int x, int y) { return values_[index(x, y)]; }
  std::size_t index(int x, int y) const {
    return static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
           static_cast<std::size_t>(x);
  }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool same_shape(const Image& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }
  double mean() const;
  double min() const;
  double max() const;

  friend bool operator==(const Image&, const Image&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> values_;
};

// Binary indicator of the stored pixels (the set K).
class Mask {
 public:
  Mask() = default;
  Mask(int width, int height, bool fill = false);
  Mask(int width, int height, std::vector<std::uint8_t> bits);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t size() const { return bits_.size(); }

  bool operator[](std::size_t i) const { return bits_[i] != 0; }
  void set(std::size_t i, bool on) { bits_[i] = on ? 1 : 0; }
  bool at(int x, int y) const { return bits_[static_cast<std::size_t>(y) * width_ + x] != 0; }

  std::size_t count() const;
  double density() const { return static_cast<double>(count()) / static_cast<double>(size()); }
  // Indices of set pixels, ascending.
  std::vector<std::size_t> indices() const;
  // Indices of unset pixels, ascending.
  std::vector<std::size_t> complement_indices() const;

  bool same_shape(const Image& img) const {
    return width_ == img.width() && height_ == img.height();
  }
  bool same_shape(const Mask& other) const {
    return width_ == other.width_ && height_ == other.height_;
  }

  friend bool operator==(const Mask&, const Mask&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::uint8_t> bits_;
};

struct Seed {
  std::uint64_t value = 0;
};

// Mean squared error (1/|J|) sum (f_i - u_i)^2.
double mse(const Image& u, const Image& f);

// Truncated (radius ceil(3 sigma)), renormalised Gaussian with mirrored
// boundaries. sigma == 0 returns the input unchanged.
Image gaussian_smooth(const Image& f, double sigma);

// Half-sample symmetric reflection of an index into [0, n).
int mirror_index(int i, int n);

}  // namespace inpaintopt
