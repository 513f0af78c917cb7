#pragma once

#include <functional>

#include "inpaintopt/grid.hpp"
#include "inpaintopt/inpaint.hpp"

namespace inpaintopt {

struct AnalyticParams {
  double sigma = 1.0;
  double s = 1.0;
  double d = 0.04;

  void validate() const;
};

struct SparsifyParams {
  double p = 0.1;
  double q = 0.05;
  double d = 0.04;
  Seed seed;

  void validate() const;
};

struct ExchangeParams {
  std::size_t m = 30;
  long iterations = 500000;
  Seed seed;

  void validate() const;
};

// round(d |J|), the exact number of mask pixels for density d.
std::size_t target_mask_count(double d, std::size_t pixels);

// Raster-order Floyd-Steinberg error diffusion of a density in [0, 255];
// weights are renormalised over the neighbours that exist.
Mask floyd_steinberg_dither(const Image& density);

// Laplacian magnitude of the smoothed image raised to s, scaled to mean
// d*255 (unclamped), as used before dithering.
Image analytic_density(const Image& f, const AnalyticParams& params);

Mask analytic_mask(const Image& f, const AnalyticParams& params);

struct SparsifyStep {
  int iteration = 0;
  const Mask* mask = nullptr;
  std::size_t candidates = 0;
  std::size_t removed = 0;
};

struct SparsifyResult {
  Mask mask;
  int iterations = 0;
};

SparsifyResult probabilistic_sparsification(const Image& f, const Inpainter& inpaint,
                                            const SparsifyParams& params,
                                            const std::function<void(const SparsifyStep&)>& observer = {});

struct ExchangeStep {
  long iteration = 0;
  double mse = 0.0;  // after the accept/reject decision
  bool accepted = false;
};

struct ExchangeResult {
  Mask mask;
  Image reconstruction;
  double initial_mse = 0.0;
  double mse = 0.0;
  long accepted = 0;
};

ExchangeResult nonlocal_pixel_exchange(const Image& f, const Mask& mask, const Inpainter& inpaint,
                                       const ExchangeParams& params,
                                       const std::function<void(const ExchangeStep&)>& observer = {});

}  // namespace inpaintopt
