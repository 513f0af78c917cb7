#include "inpaintopt/operators.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

namespace {

using Triplet = Eigen::Triplet<double>;

void check_grid(int width, int height) {
  if (width < 1 || height < 1) throw ValidationError("operator: grid dimensions must be >= 1");
}

SparseOperator::Matrix from_triplets(std::size_t n, const std::vector<Triplet>& triplets) {
  SparseOperator::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

}  // namespace

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Homogeneous: return "homogeneous";
    case OperatorKind::Biharmonic: return "biharmonic";
    case OperatorKind::Eed: return "eed";
  }
  return "unknown";
}

OperatorKind parse_operator_kind(std::string_view name) {
  if (name == "homogeneous") return OperatorKind::Homogeneous;
  if (name == "biharmonic") return OperatorKind::Biharmonic;
  if (name == "eed") return OperatorKind::Eed;
  throw ValidationError("unknown operator '" + std::string(name) + "'");
}

void EedParams::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw ValidationError("eed: lambda must be positive");
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) throw ValidationError("eed: sigma must be nonnegative");
}

SparseOperator::SparseOperator(int width, int height, Matrix matrix, bool symmetric)
    : width_(width), height_(height), matrix_(std::move(matrix)), symmetric_(symmetric) {
  check_grid(width, height);
  if (matrix_.rows() != matrix_.cols() ||
      static_cast<std::size_t>(matrix_.rows()) != static_cast<std::size_t>(width) * height) {
    throw ValidationError("operator: matrix dimension does not match the grid");
  }
  matrix_.makeCompressed();
}

std::string SparseOperator::to_csv() const {
  std::ostringstream out;
  out.precision(17);
  out << "row,col,value\n";
  for (Eigen::Index r = 0; r < matrix_.outerSize(); ++r) {
    for (Matrix::InnerIterator it(matrix_, r); it; ++it) {
      out << it.row() << ',' << it.col() << ',' << it.value() << '\n';
    }
  }
  return out.str();
}

bool operator==(const SparseOperator& a, const SparseOperator& b) {
  if (a.width_ != b.width_ || a.height_ != b.height_ || a.matrix_.nonZeros() != b.matrix_.nonZeros()) {
    return false;
  }
  for (Eigen::Index r = 0; r < a.matrix_.outerSize(); ++r) {
    SparseOperator::Matrix::InnerIterator ia(a.matrix_, r);
    SparseOperator::Matrix::InnerIterator ib(b.matrix_, r);
    for (; ia && ib; ++ia, ++ib) {
      if (ia.col() != ib.col() || ia.value() != ib.value()) return false;
    }
    if (ia || ib) return false;
  }
  return true;
}

SparseOperator assemble_laplacian(int width, int height) {
  check_grid(width, height);
  const std::size_t n = static_cast<std::size_t>(width) * height;
  std::vector<Triplet> triplets;
  triplets.reserve(5 * n);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = y * width + x;
      int neighbours = 0;
      auto link = [&](int nx, int ny) {
        if (nx < 0 || nx >= width || ny < 0 || ny >= height) return;
        triplets.emplace_back(i, ny * width + nx, 1.0);
        ++neighbours;
      };
      link(x - 1, y);
      link(x + 1, y);
      link(x, y - 1);
      link(x, y + 1);
      triplets.emplace_back(i, i, 0.0 - neighbours);
    }
  }
  SparseOperator::Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return SparseOperator(width, height, std::move(m), true);
}

SparseOperator assemble_biharmonic(int width, int height) {
  const SparseOperator lap = assemble_laplacian(width, height);
  SparseOperator::Matrix sq = -(lap.matrix() * lap.matrix());
  sq.prune(0.0);
  return SparseOperator(width, height, std::move(sq), true);
}

SparseOperator assemble_linear_operator(OperatorKind kind, int width, int height) {
  switch (kind) {
    case OperatorKind::Homogeneous: return assemble_laplacian(width, height);
    case OperatorKind::Biharmonic: return assemble_biharmonic(width, height);
    case OperatorKind::Eed: break;
  }
  throw ValidationError("EED is nonlinear; assemble it with assemble_eed");
}

double charbonnier_diffusivity(double grad_sq, double lambda) {
  if (!(grad_sq >= 0.0)) throw ValidationError("charbonnier: squared gradient must be nonnegative");
  if (!(lambda > 0.0)) throw ValidationError("charbonnier: lambda must be positive");
  return 1.0 / std::sqrt(1.0 + grad_sq / (lambda * lambda));
}

std::vector<DiffusionTensor> eed_tensors(const Image& u, const EedParams& params) {
  params.validate();
  const Image smooth = gaussian_smooth(u, params.sigma);
  const int w = u.width();
  const int h = u.height();
  std::vector<DiffusionTensor> tensors(u.size());
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double gx =
          0.5 * (smooth.at(mirror_index(x + 1, w), y) - smooth.at(mirror_index(x - 1, w), y));
      const double gy =
          0.5 * (smooth.at(x, mirror_index(y + 1, h)) - smooth.at(x, mirror_index(y - 1, h)));
      const double grad_sq = gx * gx + gy * gy;
      DiffusionTensor& d = tensors[smooth.index(x, y)];
      if (grad_sq == 0.0) continue;  // identity
      const double norm = std::sqrt(grad_sq);
      const double vx = gx / norm;
      const double vy = gy / norm;
      const double g = charbonnier_diffusivity(grad_sq, params.lambda);
      // eigenvalue g along the gradient, 1 across it
      d.a = g * vx * vx + vy * vy;
      d.b = (g - 1.0) * vx * vy;
      d.c = g * vy * vy + vx * vx;
    }
  }
  return tensors;
}

SparseOperator assemble_eed(const Image& u, const EedParams& params) {
  const std::vector<DiffusionTensor> tensors = eed_tensors(u, params);
  const int w = u.width();
  const int h = u.height();
  const std::size_t n = u.size();
  auto idx = [w](int x, int y) { return y * w + x; };

  // Each 2x2 cell carries the mean tensor of its pixels, split into axial
  // and diagonal difference weights; |b| is moved from the axial to the
  // diagonal directions so that both diagonal weights are nonnegative.
  struct CellWeights {
    double a, c;
    double x, y, main, anti;
  };
  std::vector<CellWeights> cells;
  if (w > 1 && h > 1) {
    cells.resize(static_cast<std::size_t>(w - 1) * static_cast<std::size_t>(h - 1));
    for (int y = 0; y + 1 < h; ++y) {
      for (int x = 0; x + 1 < w; ++x) {
        double a = 0.0, b = 0.0, c = 0.0;
        for (int k : {idx(x, y), idx(x + 1, y), idx(x, y + 1), idx(x + 1, y + 1)}) {
          a += tensors[k].a;
          b += tensors[k].b;
          c += tensors[k].c;
        }
        a *= 0.25;
        b *= 0.25;
        c *= 0.25;
        const double s = std::abs(b);
        cells[static_cast<std::size_t>(y) * (w - 1) + x] = {a, c, a - s, c - s, 0.5 * (s + b), 0.5 * (s - b)};
      }
    }
  }
  auto cell = [&](int x, int y) -> const CellWeights& {
    return cells[static_cast<std::size_t>(y) * (w - 1) + x];
  };

  // Border edges see one cell inside and half of its mirror image outside;
  // the mirrored half-cell collapses to a pure axial difference.
  auto border_weight = [](double axial, double full) { return 0.5 * (axial + full); };

  std::vector<Triplet> triplets;
  triplets.reserve(10 * n);
  // the diagonal is always stored, as in the Laplacian
  for (std::size_t i = 0; i < n; ++i) triplets.emplace_back(i, i, 0.0);
  auto couple = [&](int i, int j, double weight) {
    if (weight == 0.0) return;
    triplets.emplace_back(i, j, weight);
    triplets.emplace_back(j, i, weight);
    triplets.emplace_back(i, i, -weight);
    triplets.emplace_back(j, j, -weight);
  };

  for (int y = 0; y < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      double weight;
      if (h == 1) {
        weight = 0.5 * (tensors[idx(x, y)].a + tensors[idx(x + 1, y)].a);
      } else if (y == 0) {
        weight = border_weight(cell(x, 0).x, cell(x, 0).a);
      } else if (y == h - 1) {
        weight = border_weight(cell(x, h - 2).x, cell(x, h - 2).a);
      } else {
        weight = 0.5 * (cell(x, y - 1).x + cell(x, y).x);
      }
      couple(idx(x, y), idx(x + 1, y), weight);
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double weight;
      if (w == 1) {
        weight = 0.5 * (tensors[idx(x, y)].c + tensors[idx(x, y + 1)].c);
      } else if (x == 0) {
        weight = border_weight(cell(0, y).y, cell(0, y).c);
      } else if (x == w - 1) {
        weight = border_weight(cell(w - 2, y).y, cell(w - 2, y).c);
      } else {
        weight = 0.5 * (cell(x - 1, y).y + cell(x, y).y);
      }
      couple(idx(x, y), idx(x, y + 1), weight);
    }
  }
  for (int y = 0; y + 1 < h; ++y) {
    for (int x = 0; x + 1 < w; ++x) {
      couple(idx(x, y), idx(x + 1, y + 1), cell(x, y).main);
      couple(idx(x + 1, y), idx(x, y + 1), cell(x, y).anti);
    }
  }
  return SparseOperator(w, h, from_triplets(n, triplets), true);
}

}  // namespace inpaintopt
