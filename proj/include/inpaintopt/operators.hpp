#pragma once

#include <Eigen/Sparse>
#include <string>
#include <string_view>

#include "inpaintopt/grid.hpp"

namespace inpaintopt {

enum class OperatorKind { Homogeneous, Biharmonic, Eed };

std::string_view to_string(OperatorKind kind);
OperatorKind parse_operator_kind(std::string_view name);

// Parameters of edge-enhancing diffusion: contrast lambda > 0 and
// presmoothing standard deviation sigma >= 0.
struct EedParams {
  double lambda = 0.8;
  double sigma = 0.7;

  void validate() const;
};

// Square sparse matrix of a discrete differential operator on a width x
// height grid with homogeneous Neumann boundaries. Entries are stored
// row-major with ascending columns, so iteration order is canonical.
class SparseOperator {
 public:
  using Matrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

  SparseOperator(int width, int height, Matrix matrix, bool symmetric);

  int width() const { return width_; }
  int height() const { return height_; }
  std::size_t dimension() const { return static_cast<std::size_t>(matrix_.rows()); }
  const Matrix& matrix() const { return matrix_; }
  // True when the operator is symmetric by construction.
  bool symmetric() const { return symmetric_; }
  double coeff(std::size_t row, std::size_t col) const {
    return matrix_.coeff(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
  }

  // Debug dump as "row,col,value" lines.
  std::string to_csv() const;

  friend bool operator==(const SparseOperator& a, const SparseOperator& b);

 private:
  int width_;
  int height_;
  Matrix matrix_;
  bool symmetric_;
};

// 5-point Laplacian: +1 for every existing 4-neighbour, diagonal is minus
// the neighbour count.
SparseOperator assemble_laplacian(int width, int height);

// -A*A with A the Neumann Laplacian (13-point stencil in the interior).
SparseOperator assemble_biharmonic(int width, int height);

// Linear operator of the given kind; EED is rejected since it depends on u.
SparseOperator assemble_linear_operator(OperatorKind kind, int width, int height);

// (1 + grad_sq / lambda^2)^(-1/2)
double charbonnier_diffusivity(double grad_sq, double lambda);

// Diffusion tensor entries [a b; b c] of one pixel.
struct DiffusionTensor {
  double a = 1.0;
  double b = 0.0;
  double c = 1.0;
};

// Per-pixel EED tensors built from the central-difference gradient of the
// Gaussian-smoothed u.
std::vector<DiffusionTensor> eed_tensors(const Image& u, const EedParams& params);

// div(D grad u) on the 3x3 neighbourhood, assembled cell by cell from 2x2
// pixel blocks carrying their mean tensor. Each cell contributes weighted
// squared differences along both axes and both diagonals, so the operator
// is symmetric, negative semidefinite and has zero row sums. Where the
// tensor is the identity it reduces to the 5-point Laplacian.
SparseOperator assemble_eed(const Image& u, const EedParams& params);

}  // namespace inpaintopt
