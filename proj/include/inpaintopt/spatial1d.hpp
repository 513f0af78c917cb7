#pragma once

#include <functional>
#include <optional>
#include <string_view>
#include <vector>

namespace inpaintopt {

// Strictly convex, continuously differentiable function on [a, b].
class ConvexFunction1D {
 public:
  using Fn = std::function<double(double)>;

  // `primitive` is an optional antiderivative; without it integrals use
  // adaptive Gauss-Kronrod quadrature.
  ConvexFunction1D(Fn eval, Fn deriv, double a, double b, Fn primitive = {});

  double operator()(double x) const { return eval_(x); }
  double deriv(double x) const { return deriv_(x); }
  double a() const { return a_; }
  double b() const { return b_; }

  double integral(double lo, double hi) const;
  double integral() const { return integral(a_, b_); }

 private:
  Fn eval_;
  Fn deriv_;
  Fn primitive_;
  double a_;
  double b_;
};

// "exp2x3px": exp(2x-3)+x on [-4,4], "expx": exp(x) on [-15,15],
// "square": x^2 on [-1,1].
ConvexFunction1D builtin_function(std::string_view name);

// Knots c_0 < c_1 < ... < c_N.
class KnotSet {
 public:
  explicit KnotSet(std::vector<double> positions);

  static KnotSet uniform(double a, double b, int intervals);

  std::size_t size() const { return c_.size(); }
  int intervals() const { return static_cast<int>(c_.size()) - 1; }
  double operator[](std::size_t i) const { return c_[i]; }
  const std::vector<double>& positions() const { return c_; }

  friend bool operator==(const KnotSet&, const KnotSet&) = default;

 private:
  std::vector<double> c_;
};

// Piecewise linear function with the given values at the knots.
struct Spline1D {
  KnotSet knots;
  std::vector<double> values;

  Spline1D(KnotSet k, std::vector<double> v);
  double operator()(double x) const;
};

// Linear interpolant of f at the knots.
Spline1D interpolating_spline(const ConvexFunction1D& f, const KnotSet& knots);

// Trapezoid sum minus integral: the L1 error of the linear interpolant.
double l1_interp_error(const ConvexFunction1D& f, const KnotSet& knots);

// Exact integral of |s - f| over [a, b], using that s - f is concave on
// every knot interval.
double l1_spline_error(const ConvexFunction1D& f, const Spline1D& s);

struct FreeKnotOptions {
  int max_iters = 5000;
  double tol = 1e-10;
  // Called after every iteration with the iteration number, knots and
  // the current L1 error.
  std::function<void(int, const KnotSet&, double)> observer;
};

struct FreeKnotResult {
  KnotSet knots;
  int iterations = 0;
  bool converged = false;
};

// Alternating even/odd knot updates for interpolating linear splines with
// N intervals. Throws NumericalError when f turns out not to be convex.
FreeKnotResult optimize_knots_interpolation(const ConvexFunction1D& f, int intervals,
                                            const std::optional<KnotSet>& init = std::nullopt,
                                            const FreeKnotOptions& opts = {});

struct OptimalLineResult {
  KnotSet knots;
  Spline1D spline;
  int iterations = 0;
  bool converged = false;
};

// Points at 3/4 a + 1/4 b and 1/4 a + 3/4 b where the L1-optimal line on
// [a, b] interpolates a strictly convex function.
std::pair<double, double> optimal_line_points(double a, double b);

// Knots of the approximating spline from intersections of per-interval
// optimal lines.
OptimalLineResult optimal_line_knots(const ConvexFunction1D& f, int intervals,
                            const std::optional<KnotSet>& init = std::nullopt,
                            const FreeKnotOptions& opts = {});

// L1-optimal coefficients of the hat-function basis on fixed knots.
Spline1D tonal_optimize_1d(const ConvexFunction1D& f, const KnotSet& knots);

// E((1-t) U1 + t U2) for exp on [-15, 15] at 101 uniform t.
std::vector<double> nonconvexity_witness();

// Interior sample indices i where values[i] exceeds the mean of its neighbours.
std::vector<std::size_t> midpoint_convexity_violations(const std::vector<double>& values);

}  // namespace inpaintopt
