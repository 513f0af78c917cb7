#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "inpaintopt/grid.hpp"
#include "inpaintopt/operators.hpp"

namespace testing_support {

using inpaintopt::Image;
using inpaintopt::Mask;

// Dense Neumann Laplacian built from neighbour lists, independent of the
// sparse assembly code.
inline Eigen::MatrixXd dense_laplacian(int w, int h) {
  const int n = w * h;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      const int nb[4][2] = {{x - 1, y}, {x + 1, y}, {x, y - 1}, {x, y + 1}};
      for (const auto& p : nb) {
        if (p[0] < 0 || p[0] >= w || p[1] < 0 || p[1] >= h) continue;
        a(i, p[1] * w + p[0]) += 1.0;
        a(i, i) -= 1.0;
      }
    }
  }
  return a;
}

inline Eigen::MatrixXd dense(const inpaintopt::SparseOperator& op) { return Eigen::MatrixXd(op.matrix()); }

// M = C - (I - C) A
inline Eigen::MatrixXd dense_inpainting_matrix(const Mask& mask, const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (mask[static_cast<std::size_t>(i)]) {
      m.row(i).setZero();
      m(i, i) = 1.0;
    } else {
      m.row(i) = -a.row(i);
    }
  }
  return m;
}

inline Eigen::VectorXd vec(const Image& img) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(img.size()));
  for (std::size_t i = 0; i < img.size(); ++i) v[static_cast<Eigen::Index>(i)] = img[i];
  return v;
}

// Dense oracle for the optimal tonal values: least squares over the mask
// entries of |M^{-1} C g - f|^2.
inline Eigen::VectorXd dense_optimal_tonal(const Mask& mask, const Eigen::MatrixXd& a, const Image& f,
                                           double* best_mse = nullptr) {
  const Eigen::MatrixXd minv = dense_inpainting_matrix(mask, a).inverse();
  const auto known = mask.indices();
  Eigen::MatrixXd b(a.rows(), static_cast<Eigen::Index>(known.size()));
  for (std::size_t k = 0; k < known.size(); ++k) b.col(static_cast<Eigen::Index>(k)) = minv.col(static_cast<Eigen::Index>(known[k]));
  const Eigen::VectorXd fv = vec(f);
  const Eigen::VectorXd g = b.colPivHouseholderQr().solve(fv);
  if (best_mse) *best_mse = (b * g - fv).squaredNorm() / static_cast<double>(fv.size());
  return g;
}

inline Image random_image(std::mt19937_64& rng, int w, int h, double lo = 0.0, double hi = 255.0) {
  std::uniform_real_distribution<double> dist(lo, hi);
  Image img(w, h);
  for (std::size_t i = 0; i < img.size(); ++i) img[i] = dist(rng);
  return img;
}

// Random mask with `count` set pixels (at least one).
inline Mask random_mask(std::mt19937_64& rng, int w, int h, std::size_t count) {
  std::vector<std::size_t> idx(static_cast<std::size_t>(w * h));
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::shuffle(idx.begin(), idx.end(), rng);
  Mask mask(w, h);
  for (std::size_t i = 0; i < std::max<std::size_t>(1, count) && i < idx.size(); ++i) mask.set(idx[i], true);
  return mask;
}

inline double max_abs_diff(const Image& a, const Image& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testing_support
