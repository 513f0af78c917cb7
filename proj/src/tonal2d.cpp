#include "inpaintopt/tonal2d.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <numbers>

#include "inpaintopt/errors.hpp"
#include "inpaintopt/random.hpp"

namespace inpaintopt {

void FedConfig::validate() const {
  if (M < 1) throw ValidationError("fed: cycle length M must be at least 1");
  if (!(eps > 0.0)) throw ValidationError("fed: eps must be positive");
  if (power_iters < 5) throw ValidationError("fed: power_iters must be at least 5");
  if (!(alpha_star_fraction > 0.0 && alpha_star_fraction < 1.0)) {
    throw ValidationError("fed: alpha_star_fraction must lie in (0, 1)");
  }
  if (max_cycles < 1) throw ValidationError("fed: max_cycles must be positive");
}

void EedGvoConfig::validate() const {
  if (!(alpha > 0.0)) throw ValidationError("eed gvo: alpha must be positive");
  if (!(eta > 0.0)) throw ValidationError("eed gvo: eta must be positive");
  if (iterations < 0) throw ValidationError("eed gvo: iterations must be nonnegative");
  if (jacobian_refresh < 1) throw ValidationError("eed gvo: jacobian_refresh must be positive");
}

Image masked_values(const Image& f, const Mask& mask) {
  if (!mask.same_shape(f)) throw ValidationError("image and mask dimensions differ");
  Image g(f.width(), f.height());
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (mask[i]) g[i] = f[i];
  }
  return g;
}

namespace {

void check_inputs(const Image& f, const Mask& mask) {
  if (!mask.same_shape(f)) throw ValidationError("image and mask dimensions differ");
  if (mask.count() == 0) throw ValidationError("tonal optimisation: mask is empty");
}

void zero_off_mask(Eigen::VectorXd& v, const Mask& mask) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) v[i] = 0.0;
  }
}

// The linear tonal problem: reconstruction D g, its gradient, and counters.
class LinearTonalProblem {
 public:
  LinearTonalProblem(const Image& f, const Mask& mask, const SparseOperator& op, const SolverConfig& cfg)
      : f_(to_vector(f)), mask_(mask), system_(mask, op, cfg), width_(f.width()), height_(f.height()) {}

  Eigen::VectorXd reconstruct(const Eigen::VectorXd& g) const { return system_.reconstruct(g); }

  Eigen::VectorXd gradient(const Eigen::VectorXd& u) {
    ++evaluations_;
    Eigen::VectorXd grad = system_.solve_transposed(u - f_);
    zero_off_mask(grad, mask_);
    return grad;
  }

  double energy(const Eigen::VectorXd& u) const { return 0.5 * (u - f_).squaredNorm(); }
  double mse(const Eigen::VectorXd& u) const { return (u - f_).squaredNorm() / static_cast<double>(u.size()); }
  const Eigen::VectorXd& f() const { return f_; }
  const Mask& mask() const { return mask_; }
  long evaluations() const { return evaluations_; }

  GvoResult finish(const Eigen::VectorXd& g, int iterations, bool converged) const {
    const Eigen::VectorXd u = reconstruct(g);
    return GvoResult{to_image(g, width_, height_), to_image(u, width_, height_), mse(u), iterations,
                     evaluations_, converged};
  }

 private:
  Eigen::VectorXd f_;
  Mask mask_;
  LinearInpaintingSystem system_;
  int width_;
  int height_;
  long evaluations_ = 0;
};

}  // namespace

Eigen::MatrixXd echo_matrix(const LinearInpaintingSystem& system) {
  const std::vector<std::size_t> k = system.mask().indices();
  const auto n = static_cast<Eigen::Index>(system.dimension());
  Eigen::MatrixXd b(n, static_cast<Eigen::Index>(k.size()));
  for (std::size_t j = 0; j < k.size(); ++j) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
    e[static_cast<Eigen::Index>(k[j])] = 1.0;
    b.col(static_cast<Eigen::Index>(j)) = system.solve(e);
  }
  return b;
}

GvoResult gvo_direct(const Image& f, const Mask& mask, const SparseOperator& op, const SolverConfig& cfg) {
  check_inputs(f, mask);
  const LinearInpaintingSystem system(mask, op, cfg);
  const Eigen::MatrixXd b = echo_matrix(system);
  const Eigen::VectorXd fv = to_vector(f);
  const Eigen::MatrixXd normal = b.transpose() * b;
  const Eigen::LLT<Eigen::MatrixXd> llt(normal);
  if (llt.info() != Eigen::Success) throw NumericalError("normal equations are not positive definite");
  const Eigen::VectorXd gk = llt.solve(b.transpose() * fv);

  const std::vector<std::size_t> k = mask.indices();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(fv.size());
  for (std::size_t j = 0; j < k.size(); ++j) g[static_cast<Eigen::Index>(k[j])] = gk[static_cast<Eigen::Index>(j)];
  const Eigen::VectorXd u = system.reconstruct(g);
  return GvoResult{to_image(g, f.width(), f.height()), to_image(u, f.width(), f.height()),
                   (u - fv).squaredNorm() / static_cast<double>(fv.size()), 1, 0, true};
}

GvoResult gvo_exact_line_search(const Image& f, const Mask& mask, const SparseOperator& op, double eps,
                                const SolverConfig& cfg, const GvoObserver& observer, int max_iters) {
  check_inputs(f, mask);
  if (!(eps > 0.0)) throw ValidationError("line search: eps must be positive");
  LinearTonalProblem problem(f, mask, op, cfg);
  Eigen::VectorXd g = to_vector(masked_values(f, mask));
  Eigen::VectorXd u = problem.reconstruct(g);
  Eigen::VectorXd grad = problem.gradient(u);
  const double initial = grad.squaredNorm();
  double grad_sq = initial;

  int iter = 0;
  while (grad_sq > eps * initial && iter < max_iters) {
    const Eigen::VectorXd z = problem.reconstruct(grad);
    const double denom = z.squaredNorm();
    if (!(denom > 0.0)) throw NumericalError("line search: reconstruction of a nonzero gradient vanished");
    const double alpha = (u - problem.f()).dot(z) / denom;
    g -= alpha * grad;
    u -= alpha * z;
    grad = problem.gradient(u);
    grad_sq = grad.squaredNorm();
    ++iter;
    if (observer) observer({iter, grad_sq, problem.mse(u)});
  }
  return problem.finish(g, iter, grad_sq <= eps * initial);
}

std::vector<double> fed_step_sizes(double alpha_star, int M) {
  if (!(alpha_star > 0.0)) throw ValidationError("fed: alpha* must be positive");
  if (M < 1) throw ValidationError("fed: cycle length M must be at least 1");
  std::vector<double> sorted(static_cast<std::size_t>(M));
  for (int i = 0; i < M; ++i) {
    const double c = std::cos(std::numbers::pi * (2.0 * i + 1.0) / (4.0 * M + 2.0));
    sorted[static_cast<std::size_t>(i)] = alpha_star / (2.0 * c * c);
  }
  if (M <= 12) return sorted;

  // kappa-cycle reordering modulo the smallest prime above M
  auto is_prime = [](int n) {
    if (n < 2) return false;
    for (int d = 2; d * d <= n; ++d) {
      if (n % d == 0) return false;
    }
    return true;
  };
  const int kappa = M / 2;
  int prime = M + 1;
  while (!is_prime(prime)) ++prime;
  std::vector<double> out(static_cast<std::size_t>(M));
  for (int k = 0, l = 0; l < M; ++k, ++l) {
    int index;
    while ((index = ((k + 1) * kappa) % prime - 1) >= M) ++k;
    out[static_cast<std::size_t>(l)] = sorted[static_cast<std::size_t>(index)];
  }
  return out;
}

double estimate_lipschitz(const Mask& mask, const SparseOperator& op, int power_iters, const SolverConfig& cfg) {
  if (mask.count() == 0) throw ValidationError("lipschitz: mask is empty");
  if (power_iters < 1) throw ValidationError("lipschitz: power_iters must be positive");
  const LinearInpaintingSystem system(mask, op, cfg);
  Rng rng(Seed{0x5eedULL});
  Eigen::VectorXd x = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mask.size()));
  for (std::size_t i : mask.indices()) x[static_cast<Eigen::Index>(i)] = 0.5 + rng.uniform();
  x.normalize();
  double estimate = 0.0;
  for (int k = 0; k < power_iters; ++k) {
    // D^T D x = C M^{-T} M^{-1} C x
    Eigen::VectorXd y = system.solve_transposed(system.reconstruct(x));
    zero_off_mask(y, mask);
    estimate = x.dot(y);
    const double norm = y.norm();
    if (!(norm > 0.0)) break;
    x = y / norm;
  }
  return estimate;
}

GvoResult gvo_fed(const Image& f, const Mask& mask, const SparseOperator& op, const FedConfig& fed,
                  const SolverConfig& cfg, const GvoObserver& observer) {
  check_inputs(f, mask);
  fed.validate();
  const double lipschitz = estimate_lipschitz(mask, op, fed.power_iters, cfg);
  if (!(lipschitz > 0.0)) throw NumericalError("fed: Lipschitz estimate is not positive");
  double alpha_star = fed.alpha_star_fraction * 2.0 / lipschitz;
  std::vector<double> steps = fed_step_sizes(alpha_star, fed.M);

  LinearTonalProblem problem(f, mask, op, cfg);
  Eigen::VectorXd g = to_vector(masked_values(f, mask));
  Eigen::VectorXd u = problem.reconstruct(g);
  Eigen::VectorXd grad = problem.gradient(u);
  const double initial = grad.squaredNorm();
  double grad_sq = initial;
  double energy = problem.energy(u);

  int cycles = 0;
  while (grad_sq > fed.eps * initial && cycles < fed.max_cycles) {
    const Eigen::VectorXd g_start = g;
    const Eigen::VectorXd grad_start = grad;
    for (int i = 0; i < fed.M; ++i) {
      if (i > 0) grad = problem.gradient(problem.reconstruct(g));
      g -= steps[static_cast<std::size_t>(i)] * grad;
    }
    u = problem.reconstruct(g);
    grad = problem.gradient(u);
    ++cycles;
    const double next_energy = problem.energy(u);
    if (next_energy > energy) {
      // the Lipschitz estimate was too low; retry the cycle with half the step
      g = g_start;
      grad = grad_start;
      alpha_star *= 0.5;
      steps = fed_step_sizes(alpha_star, fed.M);
      continue;
    }
    energy = next_energy;
    grad_sq = grad.squaredNorm();
    if (observer) observer({cycles, grad_sq, problem.mse(u)});
  }
  return problem.finish(g, cycles, grad_sq <= fed.eps * initial);
}

GvoResult gvo_eed(const Image& f, const Mask& mask, const EedParams& params, const EedGvoConfig& conf,
                  const SolverConfig& cfg, const GvoObserver& observer) {
  check_inputs(f, mask);
  params.validate();
  conf.validate();
  const std::vector<std::size_t> k = mask.indices();
  const Eigen::VectorXd fv = to_vector(f);
  const auto n = static_cast<Eigen::Index>(f.size());

  Image g = masked_values(f, mask);
  Image u = solve_eed_inpainting(mask, g, params, cfg).u;
  GvoResult best{g, u, mse(u, f), 0, 0, true};
  Eigen::MatrixXd jacobian(n, static_cast<Eigen::Index>(k.size()));

  for (int it = 1; it <= conf.iterations; ++it) {
    if ((it - 1) % conf.jacobian_refresh == 0) {
      const Eigen::VectorXd base = to_vector(u);
      for (std::size_t j = 0; j < k.size(); ++j) {
        Image shifted = g;
        shifted[k[j]] += conf.eta;
        const Image uj = solve_eed_inpainting(mask, shifted, params, cfg, u).u;
        jacobian.col(static_cast<Eigen::Index>(j)) = (to_vector(uj) - base) / conf.eta;
      }
    }
    const Eigen::VectorXd grad = jacobian.transpose() * (to_vector(u) - fv);
    ++best.gradient_evaluations;
    for (std::size_t j = 0; j < k.size(); ++j) g[k[j]] -= conf.alpha * grad[static_cast<Eigen::Index>(j)];
    u = solve_eed_inpainting(mask, g, params, cfg, u).u;
    const double e = mse(u, f);
    best.iterations = it;
    if (observer) observer({it, grad.squaredNorm(), e});
    if (e < best.mse) {
      best.g = g;
      best.u = u;
      best.mse = e;
    }
  }
  return best;
}

}  // namespace inpaintopt
