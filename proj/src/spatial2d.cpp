#include "inpaintopt/spatial2d.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "inpaintopt/errors.hpp"
#include "inpaintopt/random.hpp"

namespace inpaintopt {

void AnalyticParams::validate() const {
  if (!(sigma >= 0.0)) throw ValidationError("analytic: sigma must be nonnegative");
  if (!(s > 0.0)) throw ValidationError("analytic: exponent s must be positive");
  if (!(d > 0.0 && d < 1.0)) throw ValidationError("analytic: density d must lie in (0, 1)");
}

void SparsifyParams::validate() const {
  if (!(p > 0.0 && p <= 1.0)) throw ValidationError("sparsify: p must lie in (0, 1]");
  if (!(q > 0.0 && q <= 1.0)) throw ValidationError("sparsify: q must lie in (0, 1]");
  if (!(d > 0.0 && d < 1.0)) throw ValidationError("sparsify: density d must lie in (0, 1)");
}

void ExchangeParams::validate() const {
  if (m < 1) throw ValidationError("exchange: m must be at least 1");
  if (iterations < 0) throw ValidationError("exchange: iteration budget must be nonnegative");
}

std::size_t target_mask_count(double d, std::size_t pixels) {
  return static_cast<std::size_t>(std::llround(d * static_cast<double>(pixels)));
}

Mask floyd_steinberg_dither(const Image& density) {
  const int w = density.width();
  const int h = density.height();
  std::vector<double> v(density.values().begin(), density.values().end());
  for (double x : v) {
    if (!(x >= 0.0 && x <= 255.0)) throw ValidationError("dither: density values must lie in [0, 255]");
  }
  struct Share {
    int dx, dy;
    double weight;
  };
  constexpr Share shares[] = {{1, 0, 7.0}, {-1, 1, 3.0}, {0, 1, 5.0}, {1, 1, 1.0}};

  Mask mask(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t i = density.index(x, y);
      const bool on = v[i] >= 127.5;
      mask.set(i, on);
      const double err = v[i] - (on ? 255.0 : 0.0);
      double total = 0.0;
      for (const Share& s : shares) {
        const int nx = x + s.dx;
        const int ny = y + s.dy;
        if (nx >= 0 && nx < w && ny < h) total += s.weight;
      }
      if (total == 0.0) continue;
      for (const Share& s : shares) {
        const int nx = x + s.dx;
        const int ny = y + s.dy;
        if (nx >= 0 && nx < w && ny < h) v[density.index(nx, ny)] += err * s.weight / total;
      }
    }
  }
  return mask;
}

namespace {

// Second difference along one axis; border samples copy the nearest
// interior value and axes shorter than 3 contribute nothing.
double second_difference(const Image& f, int x, int y, bool along_x) {
  const int n = along_x ? f.width() : f.height();
  if (n < 3) return 0.0;
  int k = along_x ? x : y;
  k = std::clamp(k, 1, n - 2);
  if (along_x) return f.at(k - 1, y) - 2.0 * f.at(k, y) + f.at(k + 1, y);
  return f.at(x, k - 1) - 2.0 * f.at(x, k) + f.at(x, k + 1);
}

double laplacian_peak(const Image& f) {
  double peak = 0.0;
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      peak = std::max(peak, std::abs(second_difference(f, x, y, true) + second_difference(f, x, y, false)));
    }
  }
  return peak;
}

double abs_max(const Image& f) {
  double m = 0.0;
  for (double v : f.values()) m = std::max(m, std::abs(v));
  return m;
}

}  // namespace

Image analytic_density(const Image& f, const AnalyticParams& params) {
  params.validate();
  // checked on the raw data as well as after smoothing
  if (laplacian_peak(f) <= 1e-12 * (1.0 + abs_max(f))) {
    throw ValidationError("degenerate density: the Laplacian vanishes");
  }
  const Image smooth = gaussian_smooth(f, params.sigma);
  Image density(f.width(), f.height());
  for (int y = 0; y < f.height(); ++y) {
    for (int x = 0; x < f.width(); ++x) {
      const double lap = second_difference(smooth, x, y, true) + second_difference(smooth, x, y, false);
      density.at(x, y) = std::pow(std::abs(lap), params.s);
    }
  }
  if (laplacian_peak(smooth) <= 1e-12 * (1.0 + abs_max(smooth))) {
    throw ValidationError("degenerate density: the Laplacian vanishes");
  }
  const double factor = params.d * 255.0 / density.mean();
  for (double& v : density.values()) v *= factor;
  return density;
}

Mask analytic_mask(const Image& f, const AnalyticParams& params) {
  const Image density = analytic_density(f, params);
  Image clamped = density;
  for (double& v : clamped.values()) v = std::clamp(v, 0.0, 255.0);
  Mask mask = floyd_steinberg_dither(clamped);

  const std::size_t target = target_mask_count(params.d, f.size());
  std::size_t count = mask.count();
  if (count == target) return mask;
  // add the strongest unset pixels or drop the weakest set ones
  const bool add = count < target;
  std::vector<std::size_t> pool = add ? mask.complement_indices() : mask.indices();
  std::stable_sort(pool.begin(), pool.end(), [&](std::size_t a, std::size_t b) {
    return add ? density[a] > density[b] : density[a] < density[b];
  });
  for (std::size_t k = 0; count != target; ++k) {
    mask.set(pool[k], add);
    count = add ? count + 1 : count - 1;
  }
  return mask;
}

namespace {

std::size_t fraction_count(double fraction, std::size_t n) {
  // guard against products like 0.1 * 30 landing just above an integer
  const double raw = std::ceil(fraction * static_cast<double>(n) - 1e-9);
  return std::max<std::size_t>(1, static_cast<std::size_t>(raw));
}

}  // namespace

SparsifyResult probabilistic_sparsification(const Image& f, const Inpainter& inpaint,
                                            const SparsifyParams& params,
                                            const std::function<void(const SparsifyStep&)>& observer) {
  params.validate();
  const std::size_t target = target_mask_count(params.d, f.size());
  if (target == 0) throw ValidationError("sparsify: density too small for this image (no pixels kept)");

  Rng rng(params.seed);
  Mask mask(f.width(), f.height(), true);
  std::size_t count = f.size();
  Image previous;  // warm start for EED
  SparsifyResult result;
  while (count > target) {
    std::vector<std::size_t> kept = mask.indices();
    // at least one pixel must stay to keep the system solvable
    const std::size_t t = std::min(fraction_count(params.p, count), count - 1);
    const std::size_t r = std::min(fraction_count(params.q, t), count - target);
    rng.partial_shuffle(kept, t);
    std::vector<std::size_t> candidates(kept.begin(), kept.begin() + static_cast<std::ptrdiff_t>(t));

    Mask trial = mask;
    for (std::size_t i : candidates) trial.set(i, false);
    Image u = inpaint(trial, f, previous.size() == f.size() ? &previous : nullptr);

    // smallest local error first, ties by lowest index
    std::sort(candidates.begin(), candidates.end(), [&](std::size_t a, std::size_t b) {
      const double ea = (u[a] - f[a]) * (u[a] - f[a]);
      const double eb = (u[b] - f[b]) * (u[b] - f[b]);
      return ea != eb ? ea < eb : a < b;
    });
    for (std::size_t k = 0; k < r; ++k) mask.set(candidates[k], false);
    count -= r;
    previous = std::move(u);
    ++result.iterations;
    if (observer) observer({result.iterations, &mask, t, r});
  }
  result.mask = std::move(mask);
  return result;
}

ExchangeResult nonlocal_pixel_exchange(const Image& f, const Mask& mask, const Inpainter& inpaint,
                                       const ExchangeParams& params,
                                       const std::function<void(const ExchangeStep&)>& observer) {
  params.validate();
  if (!mask.same_shape(f)) throw ValidationError("exchange: image and mask dimensions differ");
  std::vector<std::size_t> in_mask = mask.indices();
  std::vector<std::size_t> outside = mask.complement_indices();
  if (in_mask.empty()) throw ValidationError("exchange: mask is empty");
  if (params.m > outside.size()) throw ValidationError("exchange: m exceeds the number of non-mask pixels");

  Rng rng(params.seed);
  ExchangeResult result;
  result.mask = mask;
  result.reconstruction = inpaint(mask, f);
  result.initial_mse = result.mse = inpaintopt::mse(result.reconstruction, f);

  for (long it = 1; it <= params.iterations; ++it) {
    rng.partial_shuffle(outside, params.m);
    const Image& u = result.reconstruction;
    std::size_t best = 0;
    double best_error = -1.0;
    for (std::size_t k = 0; k < params.m; ++k) {
      const std::size_t i = outside[k];
      const double e = (u[i] - f[i]) * (u[i] - f[i]);
      if (e > best_error || (e == best_error && i < outside[best])) {
        best = k;
        best_error = e;
      }
    }
    const std::size_t evict = rng.below(in_mask.size());

    Mask trial = result.mask;
    trial.set(outside[best], true);
    trial.set(in_mask[evict], false);
    Image v = inpaint(trial, f, &result.reconstruction);
    const double e = inpaintopt::mse(v, f);
    const bool accept = e < result.mse;
    if (accept) {
      std::swap(outside[best], in_mask[evict]);
      result.mask = std::move(trial);
      result.reconstruction = std::move(v);
      result.mse = e;
      ++result.accepted;
    }
    if (observer) observer({it, result.mse, accept});
  }
  return result;
}

}  // namespace inpaintopt
