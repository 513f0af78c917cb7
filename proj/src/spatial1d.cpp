#include "inpaintopt/spatial1d.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <string>

#include "inpaintopt/errors.hpp"

namespace inpaintopt {

ConvexFunction1D::ConvexFunction1D(Fn eval, Fn deriv, double a, double b, Fn primitive)
    : eval_(std::move(eval)), deriv_(std::move(deriv)), primitive_(std::move(primitive)), a_(a), b_(b) {
  if (!eval_ || !deriv_) throw ValidationError("convex function: eval and deriv are required");
  if (!(a < b) || !std::isfinite(a) || !std::isfinite(b)) {
    throw ValidationError("convex function: domain must satisfy a < b");
  }
  constexpr int samples = 64;
  double prev = deriv_(a);
  for (int k = 1; k <= samples; ++k) {
    const double x = a + (b - a) * k / samples;
    const double d = deriv_(x);
    if (!(d > prev)) throw ValidationError("convex function: derivative is not strictly increasing");
    prev = d;
  }
}

double ConvexFunction1D::integral(double lo, double hi) const {
  if (primitive_) return primitive_(hi) - primitive_(lo);
  if (lo == hi) return 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(eval_, lo, hi, 20, 1e-12);
}

ConvexFunction1D builtin_function(std::string_view name) {
  if (name == "exp2x3px") {
    return ConvexFunction1D([](double x) { return std::exp(2 * x - 3) + x; },
                            [](double x) { return 2 * std::exp(2 * x - 3) + 1; }, -4.0, 4.0,
                            [](double x) { return 0.5 * std::exp(2 * x - 3) + 0.5 * x * x; });
  }
  if (name == "expx") {
    auto e = [](double x) { return std::exp(x); };
    return ConvexFunction1D(e, e, -15.0, 15.0, e);
  }
  if (name == "square") {
    return ConvexFunction1D([](double x) { return x * x; }, [](double x) { return 2 * x; }, -1.0, 1.0,
                            [](double x) { return x * x * x / 3; });
  }
  throw ValidationError("unknown test function '" + std::string(name) + "'");
}

KnotSet::KnotSet(std::vector<double> positions) : c_(std::move(positions)) {
  if (c_.size() < 2) throw ValidationError("knots: at least two knots are required");
  for (std::size_t i = 0; i < c_.size(); ++i) {
    if (!std::isfinite(c_[i])) throw ValidationError("knots: positions must be finite");
    if (i > 0 && !(c_[i] > c_[i - 1])) throw ValidationError("knots: positions must be strictly increasing");
  }
}

KnotSet KnotSet::uniform(double a, double b, int intervals) {
  if (intervals < 1) throw ValidationError("knots: need at least one interval");
  std::vector<double> c(static_cast<std::size_t>(intervals) + 1);
  for (int i = 0; i <= intervals; ++i) c[static_cast<std::size_t>(i)] = a + (b - a) * i / intervals;
  c.back() = b;
  return KnotSet(std::move(c));
}

Spline1D::Spline1D(KnotSet k, std::vector<double> v) : knots(std::move(k)), values(std::move(v)) {
  if (values.size() != knots.size()) throw ValidationError("spline: one value per knot is required");
}

double Spline1D::operator()(double x) const {
  const auto& c = knots.positions();
  auto it = std::upper_bound(c.begin(), c.end(), x);
  std::size_t j = it == c.begin() ? 0 : static_cast<std::size_t>(it - c.begin()) - 1;
  j = std::min(j, c.size() - 2);
  const double t = (x - c[j]) / (c[j + 1] - c[j]);
  return (1 - t) * values[j] + t * values[j + 1];
}

namespace {

void check_knots(const ConvexFunction1D& f, const KnotSet& knots) {
  if (knots[0] != f.a() || knots[knots.size() - 1] != f.b()) {
    throw ValidationError("knots: endpoints must coincide with the domain");
  }
}

// Solves f'(x) = slope on [lo, hi] by bisection.
double inverse_derivative(const ConvexFunction1D& f, double slope, double lo, double hi) {
  if (f.deriv(lo) > slope || f.deriv(hi) < slope) {
    throw NumericalError("non-convexity detected: derivative does not bracket the secant slope");
  }
  while (hi - lo > 1e-12) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (f.deriv(mid) < slope) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

KnotSet initial_knots(const ConvexFunction1D& f, int intervals, const std::optional<KnotSet>& init) {
  if (intervals < 2) throw ValidationError("free knots: need N >= 2");
  if (!init) return KnotSet::uniform(f.a(), f.b(), intervals);
  if (init->intervals() != intervals) throw ValidationError("free knots: initial knots have wrong count");
  check_knots(f, *init);
  return *init;
}

}  // namespace

Spline1D interpolating_spline(const ConvexFunction1D& f, const KnotSet& knots) {
  std::vector<double> v(knots.size());
  for (std::size_t i = 0; i < knots.size(); ++i) v[i] = f(knots[i]);
  return Spline1D(knots, std::move(v));
}

double l1_interp_error(const ConvexFunction1D& f, const KnotSet& knots) {
  check_knots(f, knots);
  long double trapezoid = 0.0L;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    trapezoid += 0.5L * (static_cast<long double>(knots[i + 1]) - knots[i]) *
                 (static_cast<long double>(f(knots[i + 1])) + f(knots[i]));
  }
  return static_cast<double>(trapezoid - static_cast<long double>(f.integral()));
}

namespace {

// Contribution of one knot interval to the L1 error of a spline, together
// with the derivatives of that error with respect to the two end values.
struct IntervalTerms {
  double error = 0.0;
  double grad[2] = {0.0, 0.0};
  double hess[2][2] = {{0.0, 0.0}, {0.0, 0.0}};
};

double bisect_root(const std::function<double(double)>& h, double lo, double hi) {
  // h(lo) and h(hi) have opposite signs
  const bool lo_negative = h(lo) < 0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if ((h(mid) < 0) == lo_negative) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

IntervalTerms interval_terms(const ConvexFunction1D& f, double l, double r, double gl, double gr) {
  const double width = r - l;
  const double slope = (gr - gl) / width;
  auto s = [&](double x) { return gl + slope * (x - l); };
  std::function<double(double)> h = [&](double x) { return s(x) - f(x); };

  // s - f is concave; locate its maximum
  double peak;
  if (slope - f.deriv(l) <= 0) {
    peak = l;
  } else if (slope - f.deriv(r) >= 0) {
    peak = r;
  } else {
    peak = inverse_derivative(f, slope, l, r);
  }

  IntervalTerms out;
  auto piece = [&](double u, double v, double sign) {
    if (v <= u) return;
    const double integral_h = 0.5 * (s(u) + s(v)) * (v - u) - f.integral(u, v);
    out.error += sign * integral_h;
    out.grad[0] += sign * 0.5 * ((r - u) + (r - v)) / width * (v - u);
    out.grad[1] += sign * 0.5 * ((u - l) + (v - l)) / width * (v - u);
  };
  auto crossing = [&](double x) {
    const double dh = std::abs(slope - f.deriv(x));
    if (!(dh > 0)) return;
    const double b[2] = {(r - x) / width, (x - l) / width};
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) out.hess[i][j] += 2.0 * b[i] * b[j] / dh;
    }
  };

  if (!(h(peak) > 0)) {
    piece(l, r, -1.0);
    out.error = std::abs(out.error);
    return out;
  }
  double left = l;
  double right = r;
  if (h(l) < 0) {
    left = bisect_root(h, l, peak);
    crossing(left);
  }
  if (h(r) < 0) {
    right = bisect_root(h, peak, r);
    crossing(right);
  }
  piece(l, left, -1.0);
  piece(left, right, 1.0);
  piece(right, r, -1.0);
  return out;
}

struct SplineTerms {
  double error = 0.0;
  Eigen::VectorXd grad;
  Eigen::MatrixXd hess;
};

SplineTerms spline_terms(const ConvexFunction1D& f, const KnotSet& knots, const Eigen::VectorXd& g) {
  const auto n = static_cast<Eigen::Index>(knots.size());
  SplineTerms t{0.0, Eigen::VectorXd::Zero(n), Eigen::MatrixXd::Zero(n, n)};
  for (Eigen::Index j = 0; j + 1 < n; ++j) {
    const IntervalTerms it = interval_terms(f, knots[static_cast<std::size_t>(j)],
                                            knots[static_cast<std::size_t>(j + 1)], g[j], g[j + 1]);
    t.error += it.error;
    for (int a = 0; a < 2; ++a) {
      t.grad[j + a] += it.grad[a];
      for (int b = 0; b < 2; ++b) t.hess(j + a, j + b) += it.hess[a][b];
    }
  }
  return t;
}

Eigen::VectorXd to_eigen(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::vector<double> from_eigen(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

constexpr double kStationaryTol = 1e-9;

struct IrlsResult {
  Eigen::VectorXd g;
  bool converged = false;
};

// Iteratively reweighted least squares on a midpoint quadrature grid.
IrlsResult irls_coefficients(const ConvexFunction1D& f, const KnotSet& knots) {
  constexpr int points_per_interval = 256;
  constexpr double reweight_eps = 1e-9;
  constexpr double change_tol = 1e-8;
  constexpr int max_sweeps = 500;

  struct Node {
    Eigen::Index left;
    double bl, br, weight, value;
  };
  std::vector<Node> nodes;
  nodes.reserve(static_cast<std::size_t>(knots.intervals()) * points_per_interval);
  for (int j = 0; j < knots.intervals(); ++j) {
    const double l = knots[static_cast<std::size_t>(j)];
    const double width = knots[static_cast<std::size_t>(j) + 1] - l;
    for (int q = 0; q < points_per_interval; ++q) {
      const double x = l + (q + 0.5) * width / points_per_interval;
      const double br = (x - l) / width;
      nodes.push_back({j, 1.0 - br, br, width / points_per_interval, f(x)});
    }
  }

  const auto n = static_cast<Eigen::Index>(knots.size());
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g[i] = f(knots[static_cast<std::size_t>(i)]);
  for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
    Eigen::MatrixXd normal = Eigen::MatrixXd::Zero(n, n);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
    for (const Node& p : nodes) {
      const double residual = p.bl * g[p.left] + p.br * g[p.left + 1] - p.value;
      const double w = p.weight / std::max(std::abs(residual), reweight_eps);
      normal(p.left, p.left) += w * p.bl * p.bl;
      normal(p.left, p.left + 1) += w * p.bl * p.br;
      normal(p.left + 1, p.left) += w * p.bl * p.br;
      normal(p.left + 1, p.left + 1) += w * p.br * p.br;
      rhs[p.left] += w * p.bl * p.value;
      rhs[p.left + 1] += w * p.br * p.value;
    }
    const Eigen::VectorXd next = normal.ldlt().solve(rhs);
    const double change = (next - g).cwiseAbs().maxCoeff();
    g = next;
    if (change < change_tol) return {g, true};
  }
  return {g, false};
}

struct PolishResult {
  Eigen::VectorXd g;
  double gradient_norm = 0.0;
};

// Damped Newton iteration on the exact continuous L1 error.
PolishResult newton_polish(const ConvexFunction1D& f, const KnotSet& knots, Eigen::VectorXd g) {
  SplineTerms t = spline_terms(f, knots, g);
  for (int iter = 0; iter < 100; ++iter) {
    Eigen::MatrixXd h = t.hess;
    const double ridge = 1e-12 * std::max(1.0, h.diagonal().cwiseAbs().maxCoeff());
    h.diagonal().array() += ridge;
    const Eigen::VectorXd step = h.ldlt().solve(-t.grad);
    if (!step.allFinite()) break;
    const double grad_norm = t.grad.cwiseAbs().maxCoeff();
    if (grad_norm == 0.0) break;
    // near the optimum the error changes below its rounding noise, so a step
    // that shrinks the gradient without a measurable increase is accepted
    const double noise = 1e-13 * std::max(1.0, std::abs(t.error));
    bool improved = false;
    for (double scale = 1.0; scale > 1e-10; scale *= 0.5) {
      const Eigen::VectorXd trial = g + scale * step;
      SplineTerms tt = spline_terms(f, knots, trial);
      const bool better = tt.error < t.error ||
                          (tt.error <= t.error + noise && tt.grad.cwiseAbs().maxCoeff() < grad_norm);
      if (better) {
        const double moved = (scale * step).cwiseAbs().maxCoeff();
        g = trial;
        t = std::move(tt);
        improved = moved > 1e-15 * std::max(1.0, g.cwiseAbs().maxCoeff());
        break;
      }
    }
    if (!improved) break;
  }
  return {g, t.grad.cwiseAbs().maxCoeff()};
}

}  // namespace

double l1_spline_error(const ConvexFunction1D& f, const Spline1D& s) {
  check_knots(f, s.knots);
  return spline_terms(f, s.knots, to_eigen(s.values)).error;
}

FreeKnotResult optimize_knots_interpolation(const ConvexFunction1D& f, int intervals,
                                            const std::optional<KnotSet>& init,
                                            const FreeKnotOptions& opts) {
  std::vector<double> c = initial_knots(f, intervals, init).positions();
  FreeKnotResult result{KnotSet(c), 0, false};
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    double moved = 0.0;
    // even interior knots first, then odd ones; each half-sweep only reads
    // knots of the other parity
    for (std::size_t parity : {std::size_t{0}, std::size_t{1}}) {
      for (std::size_t i = parity == 0 ? 2 : 1; i + 1 < c.size(); i += 2) {
        const double slope = (f(c[i + 1]) - f(c[i - 1])) / (c[i + 1] - c[i - 1]);
        const double next = inverse_derivative(f, slope, c[i - 1], c[i + 1]);
        moved = std::max(moved, std::abs(next - c[i]));
        c[i] = next;
      }
    }
    result.knots = KnotSet(c);
    result.iterations = iter;
    if (opts.observer) opts.observer(iter, result.knots, l1_interp_error(f, result.knots));
    if (moved < opts.tol) {
      result.converged = true;
      break;
    }
  }
  return result;
}

std::pair<double, double> optimal_line_points(double a, double b) {
  return {0.75 * a + 0.25 * b, 0.25 * a + 0.75 * b};
}

OptimalLineResult optimal_line_knots(const ConvexFunction1D& f, int intervals, const std::optional<KnotSet>& init,
                            const FreeKnotOptions& opts) {
  std::vector<double> c = initial_knots(f, intervals, init).positions();
  const std::size_t n = c.size();
  std::vector<double> slope(n - 1);
  std::vector<double> offset(n - 1);
  auto fit_lines = [&] {
    for (std::size_t j = 0; j + 1 < n; ++j) {
      const auto [x1, x2] = optimal_line_points(c[j], c[j + 1]);
      slope[j] = (f(x2) - f(x1)) / (x2 - x1);
      offset[j] = f(x1) - slope[j] * x1;
    }
  };

  int iterations = 0;
  bool converged = false;
  for (int iter = 1; iter <= opts.max_iters; ++iter) {
    fit_lines();
    double moved = 0.0;
    for (std::size_t i = 1; i + 1 < n; ++i) {
      const double dm = slope[i - 1] - slope[i];
      if (std::abs(dm) < 1e-14) continue;  // parallel lines keep the knot
      const double next = (offset[i] - offset[i - 1]) / dm;
      moved = std::max(moved, std::abs(next - c[i]));
      c[i] = next;
    }
    iterations = iter;
    const KnotSet current(c);
    if (opts.observer) {
      std::vector<double> v(n);
      v[0] = offset[0] + slope[0] * c[0];
      for (std::size_t i = 1; i < n; ++i) v[i] = offset[i - 1] + slope[i - 1] * c[i];
      opts.observer(iter, current, l1_spline_error(f, Spline1D(current, v)));
    }
    if (moved < opts.tol) {
      converged = true;
      break;
    }
  }

  // values from the lines that produced the final knots
  std::vector<double> v(n);
  v[0] = offset[0] + slope[0] * c[0];
  for (std::size_t i = 1; i < n; ++i) v[i] = offset[i - 1] + slope[i - 1] * c[i];
  KnotSet knots(c);
  return OptimalLineResult{knots, Spline1D(knots, std::move(v)), iterations, converged};
}

Spline1D tonal_optimize_1d(const ConvexFunction1D& f, const KnotSet& knots) {
  check_knots(f, knots);
  const Spline1D interp = interpolating_spline(f, knots);
  const IrlsResult irls = irls_coefficients(f, knots);
  const PolishResult polished = newton_polish(f, knots, irls.g);
  // A slow reweighting phase is acceptable as long as the Newton phase
  // reaches a stationary point of the exact error.
  if (!irls.converged && !(polished.gradient_norm <= kStationaryTol * (f.b() - f.a()))) {
    throw NumericalError("tonal 1d: reweighted least squares did not converge in 500 sweeps");
  }

  Spline1D best = interp;
  double best_error = l1_spline_error(f, interp);
  for (const Eigen::VectorXd* g : {&irls.g, &polished.g}) {
    Spline1D candidate(knots, from_eigen(*g));
    const double e = l1_spline_error(f, candidate);
    if (e < best_error) {
      best_error = e;
      best = std::move(candidate);
    }
  }
  return best;
}

std::vector<double> nonconvexity_witness() {
  const ConvexFunction1D f = builtin_function("expx");
  const std::vector<double> u1 = {-15.0, 10.65, 14.65, 15.0};
  const std::vector<double> u2 = {-15.0, -1.2, 12.5, 15.0};
  constexpr int samples = 101;
  std::vector<double> energy(samples);
  for (int k = 0; k < samples; ++k) {
    const double t = static_cast<double>(k) / (samples - 1);
    std::vector<double> c(u1.size());
    for (std::size_t i = 0; i < c.size(); ++i) c[i] = (1 - t) * u1[i] + t * u2[i];
    c.front() = u1.front();
    c.back() = u1.back();
    energy[static_cast<std::size_t>(k)] = l1_interp_error(f, KnotSet(c));
  }
  return energy;
}

std::vector<std::size_t> midpoint_convexity_violations(const std::vector<double>& values) {
  std::vector<std::size_t> out;
  for (std::size_t i = 1; i + 1 < values.size(); ++i) {
    if (values[i] > 0.5 * (values[i - 1] + values[i + 1])) out.push_back(i);
  }
  return out;
}

}  // namespace inpaintopt
