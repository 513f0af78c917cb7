#pragma once

#include <Eigen/Core>
#include <memory>
#include <optional>

#include "inpaintopt/grid.hpp"
#include "inpaintopt/operators.hpp"

namespace inpaintopt {

struct SolverConfig {
  double rel_residual_tol = 1e-10;
  int max_linear_iters = 20000;
  double eed_fixed_point_tol = 1e-6;
  int eed_max_fixed_point_iters = 100;
  // Systems with more unknown pixels than this use a preconditioned Krylov
  // solver instead of a sparse factorisation.
  std::size_t direct_solver_limit = 128 * 128;

  void validate() const;
};

// The inpainting matrix M = C - (I - C) A for a fixed mask and operator,
// factorised once. Known pixels are eliminated, so only the block of -A on
// the unknown pixels is factorised.
class LinearInpaintingSystem {
 public:
  LinearInpaintingSystem(const Mask& mask, const SparseOperator& op, const SolverConfig& cfg = {});
  ~LinearInpaintingSystem();
  LinearInpaintingSystem(LinearInpaintingSystem&&) noexcept;
  LinearInpaintingSystem& operator=(LinearInpaintingSystem&&) noexcept;

  const Mask& mask() const;
  std::size_t dimension() const;

  // M x and M^T x.
  Eigen::VectorXd apply(const Eigen::VectorXd& x) const;
  Eigen::VectorXd apply_transposed(const Eigen::VectorXd& x) const;

  // M^{-1} v and M^{-T} v. Both check the residual contract and throw
  // NumericalError when it cannot be met.
  Eigen::VectorXd solve(const Eigen::VectorXd& v) const;
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& v) const;

  // Reconstruction r(c, g) = M^{-1} C g. Entries of g off the mask are
  // ignored; the result equals g exactly on the mask.
  Eigen::VectorXd reconstruct(const Eigen::VectorXd& g) const;
  Image reconstruct(const Image& g) const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

Eigen::VectorXd to_vector(const Image& img);
Image to_image(const Eigen::VectorXd& v, int width, int height);

Image solve_linear_inpainting(const Mask& mask, const Image& f, const SparseOperator& op,
                              const SolverConfig& cfg = {});

// Column i of M^{-1}: the reconstruction from a unit impulse at mask pixel i.
Image inpainting_echo(const Mask& mask, std::size_t i, const SparseOperator& op,
                      const SolverConfig& cfg = {});

struct EedResult {
  Image u;
  bool converged = false;
  int iterations = 0;
};

// Lagged fixed point u^{k+1} = M(u^k)^{-1} C f, started from the homogeneous
// reconstruction (or from `initial` when given).
EedResult solve_eed_inpainting(const Mask& mask, const Image& f, const EedParams& params,
                               const SolverConfig& cfg = {});
EedResult solve_eed_inpainting(const Mask& mask, const Image& f, const EedParams& params,
                               const SolverConfig& cfg, const Image& initial);

// Reconstruction r(c, g) for any operator kind on a fixed grid size. The
// linear operator is assembled once; EED runs the fixed point above.
class Inpainter {
 public:
  Inpainter(OperatorKind kind, int width, int height, const EedParams& eed = {},
            const SolverConfig& solver = {});

  OperatorKind kind() const { return kind_; }
  const EedParams& eed() const { return eed_; }
  const SolverConfig& solver() const { return solver_; }
  // Throws ValidationError for EED.
  const SparseOperator& linear_operator() const;

  // `warm_start` seeds the EED fixed point and is ignored by linear kinds.
  Image operator()(const Mask& mask, const Image& g, const Image* warm_start = nullptr) const;

 private:
  OperatorKind kind_;
  EedParams eed_;
  SolverConfig solver_;
  std::optional<SparseOperator> op_;
};

}  // namespace inpaintopt
