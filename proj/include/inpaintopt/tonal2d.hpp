#pragma once

#include <Eigen/Core>
#include <functional>
#include <vector>

#include "inpaintopt/grid.hpp"
#include "inpaintopt/inpaint.hpp"

namespace inpaintopt {

// Grey values g are stored as an Image over the whole grid with zeros off
// the mask. The energy is E(g) = |r(c, g) - f|^2 / 2, so that
// grad E = C M^{-T} (r(c, g) - f).

struct FedConfig {
  int M = 15;
  double eps = 1e-3;
  int power_iters = 5;
  double alpha_star_fraction = 2.0 / 3.0;
  int max_cycles = 100000;

  void validate() const;
};

struct EedGvoConfig {
  double alpha = 1e-2;
  double eta = 1.0;
  int iterations = 10;
  // Recompute the finite-difference Jacobian every this many iterations.
  int jacobian_refresh = 1;

  void validate() const;
};

struct GvoStep {
  int iteration = 0;
  double grad_sq = 0.0;
  double mse = 0.0;
};

using GvoObserver = std::function<void(const GvoStep&)>;

struct GvoResult {
  Image g;
  Image u;
  double mse = 0.0;
  int iterations = 0;
  long gradient_evaluations = 0;
  bool converged = false;
};

// C f: the image values on the mask, zero elsewhere.
Image masked_values(const Image& f, const Mask& mask);

// Dense |J| x |K| matrix whose columns are the inpainting echoes of the mask
// pixels in ascending index order.
Eigen::MatrixXd echo_matrix(const LinearInpaintingSystem& system);

// Normal equations B^T B g_K = B^T f solved by a dense Cholesky factorisation.
GvoResult gvo_direct(const Image& f, const Mask& mask, const SparseOperator& op,
                     const SolverConfig& cfg = {});

// Gradient descent with exact line search, stopped once
// |grad E|^2 <= eps |grad E(g^0)|^2.
GvoResult gvo_exact_line_search(const Image& f, const Mask& mask, const SparseOperator& op,
                                double eps = 1e-3, const SolverConfig& cfg = {},
                                const GvoObserver& observer = {}, int max_iters = 1000000);

// alpha_i = alpha* / (2 cos^2(pi (2i+1) / (4M+2))), reordered for M > 12.
std::vector<double> fed_step_sizes(double alpha_star, int M);

// Rayleigh-quotient estimate of the largest eigenvalue of D^T D with
// D = M^{-1} C after the given number of power iterations.
double estimate_lipschitz(const Mask& mask, const SparseOperator& op, int power_iters = 5,
                          const SolverConfig& cfg = {});

// Gradient descent with FED cycles of varying step sizes. The stopping
// criterion is checked after every cycle; a cycle that raises the energy
// is undone and the base step alpha* halved.
GvoResult gvo_fed(const Image& f, const Mask& mask, const SparseOperator& op, const FedConfig& fed = {},
                  const SolverConfig& cfg = {}, const GvoObserver& observer = {});

// Fixed-step gradient descent for EED inpainting with a forward-difference
// Jacobian. Returns the iterate with the lowest MSE.
GvoResult gvo_eed(const Image& f, const Mask& mask, const EedParams& params,
                  const EedGvoConfig& conf = {}, const SolverConfig& cfg = {},
                  const GvoObserver& observer = {});

}  // namespace inpaintopt
