#include "inpaintopt/synth.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

const std::vector<std::string_view>& synth_image_names() {
  static const std::vector<std::string_view> names = {"disk", "quadratic", "affine", "steps",
                                                      "gauss-blobs"};
  return names;
}

Image synth_image(std::string_view name, int width, int height) {
  if (width < 1 || height < 1) throw ValidationError("synth: dimensions must be positive");
  Image f(width, height);
  const double cx = 0.5 * (width - 1);
  const double cy = 0.5 * (height - 1);
  if (name == "disk") {
    const double r = 20.0 * std::min(width, height) / 64.0;
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const double dx = x - cx;
        const double dy = y - cy;
        f.at(x, y) = dx * dx + dy * dy <= r * r ? 255.0 : 0.0;
      }
    }
  } else if (name == "quadratic") {
    const double peak = static_cast<double>(width - 1) * (width - 1) + static_cast<double>(height - 1) * (height - 1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        f.at(x, y) = peak > 0 ? 255.0 * (static_cast<double>(x) * x + static_cast<double>(y) * y) / peak : 0.0;
      }
    }
  } else if (name == "affine") {
    const double peak = (width - 1) + (height - 1);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) f.at(x, y) = peak > 0 ? 255.0 * (x + y) / peak : 0.0;
    }
  } else if (name == "steps") {
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const int level = (4 * x) / width + 4 * ((2 * y) / height);
        f.at(x, y) = 255.0 * level / 7.0;
      }
    }
  } else if (name == "gauss-blobs") {
    const double s = std::min(width, height);
    struct Blob {
      double x, y, sigma, amplitude;
    };
    const Blob blobs[] = {{0.30, 0.35, 0.12, 110.0}, {0.70, 0.60, 0.18, -70.0}, {0.45, 0.80, 0.08, 60.0}};
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        double v = 110.0;
        for (const Blob& b : blobs) {
          const double dx = x - b.x * (width - 1);
          const double dy = y - b.y * (height - 1);
          const double sg = b.sigma * s;
          v += b.amplitude * std::exp(-(dx * dx + dy * dy) / (2.0 * sg * sg));
        }
        f.at(x, y) = std::clamp(v, 0.0, 255.0);
      }
    }
  } else {
    throw ValidationError("unknown synthetic image '" + std::string(name) + "'");
  }
  return f;
}

}  // namespace inpaintopt
