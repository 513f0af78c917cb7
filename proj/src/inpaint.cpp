#include "inpaintopt/inpaint.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>
#include <Eigen/SparseLU>
#include <cmath>
#include <cstdio>
#include <string>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

void SolverConfig::validate() const {
  if (!(rel_residual_tol > 0.0)) throw ValidationError("solver: rel_residual_tol must be positive");
  if (max_linear_iters < 1) throw ValidationError("solver: max_linear_iters must be positive");
  if (!(eed_fixed_point_tol > 0.0)) throw ValidationError("solver: eed_fixed_point_tol must be positive");
  if (eed_max_fixed_point_iters < 1) {
    throw ValidationError("solver: eed_max_fixed_point_iters must be positive");
  }
}

namespace {

using ColMatrix = Eigen::SparseMatrix<double>;

// Solver for the reduced matrix B = -A_UU and its transpose.
class ReducedSolver {
 public:
  virtual ~ReducedSolver() = default;
  virtual Eigen::VectorXd solve(const Eigen::VectorXd& b) const = 0;
  virtual Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const = 0;
};

class CholeskySolver final : public ReducedSolver {
 public:
  explicit CholeskySolver(const ColMatrix& b) {
    ldlt_.compute(b);
    if (ldlt_.info() != Eigen::Success) throw NumericalError("inpainting matrix factorisation failed");
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override { return ldlt_.solve(b); }
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const override { return ldlt_.solve(b); }

 private:
  Eigen::SimplicialLDLT<ColMatrix> ldlt_;
};

class LuSolver final : public ReducedSolver {
 public:
  explicit LuSolver(const ColMatrix& b) {
    lu_.analyzePattern(b);
    lu_.factorize(b);
    if (lu_.info() != Eigen::Success) {
      throw NumericalError("inpainting matrix is singular: " + lu_.lastErrorMessage());
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override { return lu_.solve(b); }
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const override {
    return lu_.transpose().solve(b);
  }

 private:
  // SparseLU::transpose() is not const-qualified in Eigen 3.4.
  mutable Eigen::SparseLU<ColMatrix, Eigen::COLAMDOrdering<int>> lu_;
};

template <typename Krylov>
Eigen::VectorXd run_krylov(Krylov& solver, const Eigen::VectorXd& b) {
  Eigen::VectorXd x = solver.solve(b);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("iterative inpainting solver did not converge within " +
                         std::to_string(solver.maxIterations()) + " iterations");
  }
  return x;
}

class ConjugateGradientSolver final : public ReducedSolver {
 public:
  ConjugateGradientSolver(const ColMatrix& b, const SolverConfig& cfg) {
    cg_.setMaxIterations(cfg.max_linear_iters);
    cg_.setTolerance(0.1 * cfg.rel_residual_tol);
    cg_.compute(b);
    if (cg_.info() != Eigen::Success) throw NumericalError("preconditioner construction failed");
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override { return run_krylov(cg_, b); }
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const override { return solve(b); }

 private:
  mutable Eigen::ConjugateGradient<ColMatrix, Eigen::Lower | Eigen::Upper,
                                   Eigen::IncompleteCholesky<double>>
      cg_;
};

class BiCgStabSolver final : public ReducedSolver {
 public:
  BiCgStabSolver(const ColMatrix& b, const SolverConfig& cfg) : transposed_(b.transpose()) {
    for (auto* s : {&forward_, &backward_}) {
      s->setMaxIterations(cfg.max_linear_iters);
      s->setTolerance(0.1 * cfg.rel_residual_tol);
    }
    forward_.compute(b);
    backward_.compute(transposed_);
    if (forward_.info() != Eigen::Success || backward_.info() != Eigen::Success) {
      throw NumericalError("preconditioner construction failed");
    }
  }
  Eigen::VectorXd solve(const Eigen::VectorXd& b) const override { return run_krylov(forward_, b); }
  Eigen::VectorXd solve_transposed(const Eigen::VectorXd& b) const override {
    return run_krylov(backward_, b);
  }

 private:
  ColMatrix transposed_;
  mutable Eigen::BiCGSTAB<ColMatrix, Eigen::IncompleteLUT<double>> forward_;
  mutable Eigen::BiCGSTAB<ColMatrix, Eigen::IncompleteLUT<double>> backward_;
};

constexpr int kRefinementSteps = 3;

}  // namespace

struct LinearInpaintingSystem::Impl {
  Mask mask;
  SparseOperator::Matrix a;
  SolverConfig cfg;
  std::vector<std::size_t> unknown;
  std::vector<std::ptrdiff_t> position;  // index into `unknown`, or -1 for mask pixels
  ColMatrix reduced;                     // -A_UU
  std::unique_ptr<ReducedSolver> solver;

  // Mask rows of the full system hold exactly, so its residual equals the
  // residual of the reduced one.
  Eigen::VectorXd solve_reduced(const Eigen::VectorXd& b, double scale, bool transposed) const {
    Eigen::VectorXd x = transposed ? solver->solve_transposed(b) : solver->solve(b);
    const double limit = cfg.rel_residual_tol * scale;
    for (int step = 0;; ++step) {
      const Eigen::VectorXd r =
          transposed ? Eigen::VectorXd(b - reduced.transpose() * x) : Eigen::VectorXd(b - reduced * x);
      const double norm = r.norm();
      if (!std::isfinite(norm)) throw NumericalError("inpainting solve produced non-finite values");
      if (norm <= limit) return x;
      if (step == kRefinementSteps) {
        char message[128];
        std::snprintf(message, sizeof message, "inpainting residual %.3e exceeds tolerance %.3e", norm, limit);
        throw NumericalError(message);
      }
      x += transposed ? solver->solve_transposed(r) : solver->solve(r);
    }
  }
};

LinearInpaintingSystem::LinearInpaintingSystem(const Mask& mask, const SparseOperator& op,
                                               const SolverConfig& cfg)
    : impl_(std::make_unique<Impl>()) {
  cfg.validate();
  if (mask.width() != op.width() || mask.height() != op.height()) {
    throw ValidationError("inpainting: mask and operator dimensions differ");
  }
  if (mask.count() == 0) throw ValidationError("inpainting: mask is empty, the system is singular");
  Impl& s = *impl_;
  s.mask = mask;
  s.a = op.matrix();
  s.cfg = cfg;
  s.unknown = mask.complement_indices();
  s.position.assign(mask.size(), -1);
  for (std::size_t k = 0; k < s.unknown.size(); ++k) {
    s.position[s.unknown[k]] = static_cast<std::ptrdiff_t>(k);
  }
  if (s.unknown.empty()) return;

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(s.a.nonZeros()));
  for (std::size_t k = 0; k < s.unknown.size(); ++k) {
    for (SparseOperator::Matrix::InnerIterator it(s.a, static_cast<Eigen::Index>(s.unknown[k])); it;
         ++it) {
      const std::ptrdiff_t col = s.position[static_cast<std::size_t>(it.col())];
      if (col >= 0) triplets.emplace_back(static_cast<int>(k), static_cast<int>(col), -it.value());
    }
  }
  const auto n = static_cast<Eigen::Index>(s.unknown.size());
  s.reduced.resize(n, n);
  s.reduced.setFromTriplets(triplets.begin(), triplets.end());
  s.reduced.makeCompressed();

  if (s.unknown.size() <= cfg.direct_solver_limit) {
    if (op.symmetric()) {
      s.solver = std::make_unique<CholeskySolver>(s.reduced);
    } else {
      s.solver = std::make_unique<LuSolver>(s.reduced);
    }
  } else if (op.symmetric()) {
    s.solver = std::make_unique<ConjugateGradientSolver>(s.reduced, cfg);
  } else {
    s.solver = std::make_unique<BiCgStabSolver>(s.reduced, cfg);
  }
}

LinearInpaintingSystem::~LinearInpaintingSystem() = default;
LinearInpaintingSystem::LinearInpaintingSystem(LinearInpaintingSystem&&) noexcept = default;
LinearInpaintingSystem& LinearInpaintingSystem::operator=(LinearInpaintingSystem&&) noexcept = default;

const Mask& LinearInpaintingSystem::mask() const { return impl_->mask; }
std::size_t LinearInpaintingSystem::dimension() const { return impl_->mask.size(); }

namespace {

void check_length(const Eigen::VectorXd& v, std::size_t n) {
  if (static_cast<std::size_t>(v.size()) != n) throw ValidationError("inpainting: vector length mismatch");
}

}  // namespace

Eigen::VectorXd LinearInpaintingSystem::apply(const Eigen::VectorXd& x) const {
  const Impl& s = *impl_;
  check_length(x, s.mask.size());
  const Eigen::VectorXd ax = s.a * x;
  Eigen::VectorXd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    out[i] = s.mask[static_cast<std::size_t>(i)] ? x[i] : -ax[i];
  }
  return out;
}

Eigen::VectorXd LinearInpaintingSystem::apply_transposed(const Eigen::VectorXd& x) const {
  const Impl& s = *impl_;
  check_length(x, s.mask.size());
  Eigen::VectorXd masked = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (s.mask[static_cast<std::size_t>(i)]) masked[i] = 0.0;
  }
  Eigen::VectorXd out = -(s.a.transpose() * masked);
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (s.mask[static_cast<std::size_t>(i)]) out[i] += x[i];
  }
  return out;
}

Eigen::VectorXd LinearInpaintingSystem::solve(const Eigen::VectorXd& v) const {
  const Impl& s = *impl_;
  check_length(v, s.mask.size());
  Eigen::VectorXd u = v;
  if (s.unknown.empty()) return u;
  // -A_UU u_U = v_U + A_UK v_K
  Eigen::VectorXd b(static_cast<Eigen::Index>(s.unknown.size()));
  for (std::size_t k = 0; k < s.unknown.size(); ++k) {
    double acc = v[static_cast<Eigen::Index>(s.unknown[k])];
    for (SparseOperator::Matrix::InnerIterator it(s.a, static_cast<Eigen::Index>(s.unknown[k])); it;
         ++it) {
      if (s.position[static_cast<std::size_t>(it.col())] < 0) acc += it.value() * v[it.col()];
    }
    b[static_cast<Eigen::Index>(k)] = acc;
  }
  const Eigen::VectorXd x = s.solve_reduced(b, v.norm(), false);
  for (std::size_t k = 0; k < s.unknown.size(); ++k) {
    u[static_cast<Eigen::Index>(s.unknown[k])] = x[static_cast<Eigen::Index>(k)];
  }
  return u;
}

Eigen::VectorXd LinearInpaintingSystem::solve_transposed(const Eigen::VectorXd& v) const {
  const Impl& s = *impl_;
  check_length(v, s.mask.size());
  Eigen::VectorXd y = v;
  if (s.unknown.empty()) return y;
  // -(A_UU)^T y_U = v_U, then y_K = v_K + (A_UK)^T y_U
  Eigen::VectorXd b(static_cast<Eigen::Index>(s.unknown.size()));
  for (std::size_t k = 0; k < s.unknown.size(); ++k) b[static_cast<Eigen::Index>(k)] = v[static_cast<Eigen::Index>(s.unknown[k])];
  const Eigen::VectorXd x = s.solve_reduced(b, v.norm(), true);
  for (std::size_t k = 0; k < s.unknown.size(); ++k) {
    const double xk = x[static_cast<Eigen::Index>(k)];
    y[static_cast<Eigen::Index>(s.unknown[k])] = xk;
    for (SparseOperator::Matrix::InnerIterator it(s.a, static_cast<Eigen::Index>(s.unknown[k])); it;
         ++it) {
      if (s.position[static_cast<std::size_t>(it.col())] < 0) y[it.col()] += it.value() * xk;
    }
  }
  return y;
}

Eigen::VectorXd LinearInpaintingSystem::reconstruct(const Eigen::VectorXd& g) const {
  const Impl& s = *impl_;
  check_length(g, s.mask.size());
  Eigen::VectorXd cg = g;
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    if (!s.mask[static_cast<std::size_t>(i)]) cg[i] = 0.0;
  }
  return solve(cg);
}

Image LinearInpaintingSystem::reconstruct(const Image& g) const {
  const Impl& s = *impl_;
  if (!s.mask.same_shape(g)) throw ValidationError("inpainting: image and mask dimensions differ");
  return to_image(reconstruct(to_vector(g)), g.width(), g.height());
}

Eigen::VectorXd to_vector(const Image& img) {
  return Eigen::Map<const Eigen::VectorXd>(img.values().data(), static_cast<Eigen::Index>(img.size()));
}

Image to_image(const Eigen::VectorXd& v, int width, int height) {
  return Image(width, height, std::vector<double>(v.data(), v.data() + v.size()));
}

Image solve_linear_inpainting(const Mask& mask, const Image& f, const SparseOperator& op,
                              const SolverConfig& cfg) {
  if (!mask.same_shape(f)) throw ValidationError("inpainting: image and mask dimensions differ");
  return LinearInpaintingSystem(mask, op, cfg).reconstruct(f);
}

Image inpainting_echo(const Mask& mask, std::size_t i, const SparseOperator& op,
                      const SolverConfig& cfg) {
  if (i >= mask.size() || !mask[i]) throw ValidationError("echo: pixel is not in the mask");
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mask.size()));
  e[static_cast<Eigen::Index>(i)] = 1.0;
  return to_image(LinearInpaintingSystem(mask, op, cfg).solve(e), mask.width(), mask.height());
}

namespace {

EedResult eed_fixed_point(const Mask& mask, const Image& f, const EedParams& params,
                          const SolverConfig& cfg, Image u) {
  EedResult result;
  for (int k = 1; k <= cfg.eed_max_fixed_point_iters; ++k) {
    const SparseOperator op = assemble_eed(u, params);
    Image next = LinearInpaintingSystem(mask, op, cfg).reconstruct(f);
    double change = 0.0;
    for (std::size_t i = 0; i < next.size(); ++i) change = std::max(change, std::abs(next[i] - u[i]));
    u = std::move(next);
    result.iterations = k;
    if (change < cfg.eed_fixed_point_tol) {
      result.converged = true;
      break;
    }
  }
  result.u = std::move(u);
  return result;
}

void check_eed_inputs(const Mask& mask, const Image& f, const EedParams& params, const SolverConfig& cfg) {
  params.validate();
  cfg.validate();
  if (!mask.same_shape(f)) throw ValidationError("inpainting: image and mask dimensions differ");
  if (mask.count() == 0) throw ValidationError("inpainting: mask is empty, the system is singular");
}

}  // namespace

EedResult solve_eed_inpainting(const Mask& mask, const Image& f, const EedParams& params,
                               const SolverConfig& cfg) {
  check_eed_inputs(mask, f, params, cfg);
  Image start = solve_linear_inpainting(mask, f, assemble_laplacian(f.width(), f.height()), cfg);
  return eed_fixed_point(mask, f, params, cfg, std::move(start));
}

EedResult solve_eed_inpainting(const Mask& mask, const Image& f, const EedParams& params,
                               const SolverConfig& cfg, const Image& initial) {
  check_eed_inputs(mask, f, params, cfg);
  if (!initial.same_shape(f)) throw ValidationError("inpainting: initial guess has wrong dimensions");
  return eed_fixed_point(mask, f, params, cfg, initial);
}

Inpainter::Inpainter(OperatorKind kind, int width, int height, const EedParams& eed,
                     const SolverConfig& solver)
    : kind_(kind), eed_(eed), solver_(solver) {
  solver_.validate();
  if (kind == OperatorKind::Eed) {
    eed_.validate();
  } else {
    op_ = assemble_linear_operator(kind, width, height);
  }
}

const SparseOperator& Inpainter::linear_operator() const {
  if (!op_) throw ValidationError("EED has no fixed linear operator");
  return *op_;
}

Image Inpainter::operator()(const Mask& mask, const Image& g, const Image* warm_start) const {
  if (!op_) {
    return warm_start != nullptr ? solve_eed_inpainting(mask, g, eed_, solver_, *warm_start).u
                                 : solve_eed_inpainting(mask, g, eed_, solver_).u;
  }
  return solve_linear_inpainting(mask, g, *op_, solver_);
}

}  // namespace inpaintopt
