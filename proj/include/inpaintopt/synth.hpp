#pragma once

#include <string_view>
#include <vector>

#include "inpaintopt/grid.hpp"

namespace inpaintopt {

// Deterministic analytic test images with values in [0, 255]:
//   disk        255 inside a centred disk of radius 20*min(w,h)/64, else 0
//   quadratic   x^2 + y^2 scaled to a maximum of 255 (constant Laplacian)
//   affine      x + y scaled to a maximum of 255 (zero Laplacian)
//   steps       eight flat grey levels separated by straight edges
//   gauss-blobs smooth sum of three Gaussian bumps
Image synth_image(std::string_view name, int width, int height);

const std::vector<std::string_view>& synth_image_names();

}  // namespace inpaintopt
