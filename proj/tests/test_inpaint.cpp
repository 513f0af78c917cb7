#include <doctest.h>

#include <Eigen/Dense>

#include "inpaintopt/errors.hpp"
#include "inpaintopt/inpaint.hpp"
#include "inpaintopt/synth.hpp"
#include "support.hpp"

using namespace inpaintopt;
using namespace testing_support;

TEST_CASE("full mask returns the data") {
  std::mt19937_64 rng(1);
  const Image f = random_image(rng, 6, 5);
  const Mask full(6, 5, true);
  for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
    CHECK(solve_linear_inpainting(full, f, assemble_linear_operator(k, 6, 5)) == f);
  }
  const EedResult r = solve_eed_inpainting(full, f, EedParams{});
  CHECK(r.u == f);
  CHECK(r.converged);
  CHECK(r.iterations <= 1);
}

TEST_CASE("1D homogeneous inpainting is linear interpolation") {
  Mask mask(5, 1);
  mask.set(0, true);
  mask.set(4, true);
  const Image u = solve_linear_inpainting(mask, Image(5, 1, {0, 7, 7, 7, 4}), assemble_laplacian(5, 1));
  for (int i = 0; i < 5; ++i) CHECK(std::abs(u[i] - i) < 1e-12);

  // non-symmetric placement, compared with the chord values
  Mask m2(9, 1);
  m2.set(1, true);
  m2.set(6, true);
  Image f2(9, 1);
  f2[1] = 10.0;
  f2[6] = -5.0;
  const Image u2 = solve_linear_inpainting(m2, f2, assemble_laplacian(9, 1));
  for (int i = 1; i <= 6; ++i) CHECK(std::abs(u2[i] - (10.0 - 3.0 * (i - 1))) < 1e-8);
  CHECK(std::abs(u2[0] - 10.0) < 1e-8);
  CHECK(std::abs(u2[8] + 5.0) < 1e-8);
}

TEST_CASE("linear reconstructions agree with the dense oracle and meet the residual contract") {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 12; ++trial) {
    const int w = 2 + trial % 5, h = 1 + trial % 4;
    const Image f = random_image(rng, w, h);
    const Mask mask = random_mask(rng, w, h, 1 + trial % 3);
    for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
      const SparseOperator op = assemble_linear_operator(k, w, h);
      const Eigen::MatrixXd m = dense_inpainting_matrix(mask, dense(op));
      Eigen::VectorXd cf = vec(f);
      for (std::size_t i = 0; i < mask.size(); ++i)
        if (!mask[i]) cf[static_cast<Eigen::Index>(i)] = 0.0;
      const Image u = solve_linear_inpainting(mask, f, op);
      const Eigen::VectorXd uv = vec(u);
      CHECK((m * uv - cf).norm() <= 1e-10 * cf.norm() + 1e-12);
      const Eigen::VectorXd oracle = m.fullPivLu().solve(cf);
      CHECK((uv - oracle).cwiseAbs().maxCoeff() < 1e-7 * (1.0 + oracle.cwiseAbs().maxCoeff()));
      for (std::size_t i : mask.indices()) CHECK(u[i] == f[i]);
    }
  }
}

TEST_CASE("maximum-minimum principle for homogeneous diffusion") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    const int w = 3 + trial % 9, h = 1 + (trial * 7) % 10;
    const Image f = random_image(rng, w, h);
    const Mask mask = random_mask(rng, w, h, 1 + trial % 6);
    const Image u = solve_linear_inpainting(mask, f, assemble_laplacian(w, h));
    double lo = 1e300, hi = -1e300;
    for (std::size_t i : mask.indices()) {
      lo = std::min(lo, f[i]);
      hi = std::max(hi, f[i]);
    }
    CHECK(u.min() >= lo - 1e-9);
    CHECK(u.max() <= hi + 1e-9);
  }
}

TEST_CASE("linearity of the linear reconstructions") {
  std::mt19937_64 rng(4);
  const Mask mask = random_mask(rng, 9, 8, 10);
  const Image g1 = random_image(rng, 9, 8), g2 = random_image(rng, 9, 8);
  Image mix(9, 8);
  for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = 2.5 * g1[i] - 0.75 * g2[i];
  for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
    const LinearInpaintingSystem sys(mask, assemble_linear_operator(k, 9, 8));
    const Image a = sys.reconstruct(g1), b = sys.reconstruct(g2), c = sys.reconstruct(mix);
    for (std::size_t i = 0; i < c.size(); ++i) CHECK(std::abs(c[i] - (2.5 * a[i] - 0.75 * b[i])) < 1e-7);
  }
}

TEST_CASE("transposed solves agree with the dense inverse") {
  std::mt19937_64 rng(5);
  const Mask mask = random_mask(rng, 6, 7, 5);
  for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
    const SparseOperator op = assemble_linear_operator(k, 6, 7);
    const LinearInpaintingSystem sys(mask, op);
    const Eigen::MatrixXd m = dense_inpainting_matrix(mask, dense(op));
    const Eigen::VectorXd v = vec(random_image(rng, 6, 7));
    CHECK((sys.apply(v) - m * v).norm() < 1e-9 * v.norm());
    CHECK((sys.apply_transposed(v) - m.transpose() * v).norm() < 1e-9 * v.norm());
    CHECK((m * sys.solve(v) - v).norm() < 1e-9 * v.norm());
    CHECK((m.transpose() * sys.solve_transposed(v) - v).norm() < 1e-9 * v.norm());
  }
}

TEST_CASE("iterative path matches the direct factorisation") {
  std::mt19937_64 rng(6);
  const Image f = random_image(rng, 20, 18);
  const Mask mask = random_mask(rng, 20, 18, 30);
  SolverConfig krylov;
  krylov.direct_solver_limit = 10;
  for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
    const SparseOperator op = assemble_linear_operator(k, 20, 18);
    const LinearInpaintingSystem direct(mask, op), iterative(mask, op, krylov);
    const Eigen::VectorXd v = vec(f);
    const Eigen::VectorXd a = direct.solve(v), b = iterative.solve(v);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + a.cwiseAbs().maxCoeff()));
    const Eigen::VectorXd at = direct.solve_transposed(v), bt = iterative.solve_transposed(v);
    CHECK((at - bt).cwiseAbs().maxCoeff() < 1e-5 * (1.0 + at.cwiseAbs().maxCoeff()));
  }
}

TEST_CASE("inpainting echoes") {
  std::mt19937_64 rng(7);
  SUBCASE("full mask gives unit vectors") {
    const Mask full(3, 3, true);
    const Image e = inpainting_echo(full, 4, assemble_laplacian(3, 3));
    for (std::size_t i = 0; i < 9; ++i) CHECK(e[i] == (i == 4 ? 1.0 : 0.0));
  }
  SUBCASE("superposition reproduces the reconstruction") {
    const Mask mask = random_mask(rng, 8, 6, 7);
    const Image g = random_image(rng, 8, 6);
    for (OperatorKind k : {OperatorKind::Homogeneous, OperatorKind::Biharmonic}) {
      const SparseOperator op = assemble_linear_operator(k, 8, 6);
      Image sum(8, 6);
      for (std::size_t i : mask.indices()) {
        const Image e = inpainting_echo(mask, i, op);
        for (std::size_t j = 0; j < sum.size(); ++j) sum[j] += g[i] * e[j];
      }
      CHECK(max_abs_diff(sum, solve_linear_inpainting(mask, g, op)) < 1e-8);
    }
  }
  SUBCASE("echoes on a 3x3 grid are linearly independent") {
    for (int trial = 0; trial < 10; ++trial) {
      const Mask mask = random_mask(rng, 3, 3, 1 + trial % 9);
      const auto known = mask.indices();
      Eigen::MatrixXd b(9, static_cast<Eigen::Index>(known.size()));
      for (std::size_t k = 0; k < known.size(); ++k)
        b.col(static_cast<Eigen::Index>(k)) = vec(inpainting_echo(mask, known[k], assemble_laplacian(3, 3)));
      CHECK(b.fullPivLu().rank() == static_cast<Eigen::Index>(known.size()));
    }
  }
  CHECK_THROWS_AS(inpainting_echo(Mask(3, 3), 0, assemble_laplacian(3, 3)), ValidationError);
}

TEST_CASE("eed inpainting") {
  std::mt19937_64 rng(8);
  SUBCASE("constant data stays constant") {
    const Mask mask = random_mask(rng, 10, 9, 4);
    const EedResult r = solve_eed_inpainting(mask, Image(10, 9, 77.0), EedParams{});
    CHECK(r.converged);
    for (double v : r.u.values()) CHECK(v == doctest::Approx(77.0).epsilon(1e-12));
  }
  SUBCASE("huge lambda reproduces homogeneous diffusion") {
    const Image f = synth_image("disk", 24, 24);
    const Mask mask = random_mask(rng, 24, 24, 40);
    const EedResult r = solve_eed_inpainting(mask, f, EedParams{1e9, 0.7});
    CHECK(max_abs_diff(r.u, solve_linear_inpainting(mask, f, assemble_laplacian(24, 24))) < 1e-4);
  }
  SUBCASE("fixed point converges on the disk and keeps the mask values") {
    const Image f = synth_image("disk", 32, 32);
    Mask mask(32, 32);
    for (int y = 1; y < 32; y += 3)
      for (int x = 1; x < 32; x += 3) mask.set(mask.size() / 32 * y + x, true);
    const EedResult r = solve_eed_inpainting(mask, f, EedParams{});
    CHECK(r.converged);
    CHECK(r.iterations < 100);
    for (std::size_t i : mask.indices()) CHECK(r.u[i] == f[i]);
    const EedResult again = solve_eed_inpainting(mask, f, EedParams{}, SolverConfig{}, r.u);
    CHECK(again.iterations <= 2);
    CHECK(max_abs_diff(again.u, r.u) < 1e-5);
  }
  SUBCASE("the iteration cap is honoured") {
    const Image f = synth_image("disk", 32, 32);
    const Mask mask = random_mask(rng, 32, 32, 60);
    SolverConfig cfg;
    cfg.eed_max_fixed_point_iters = 7;
    const EedResult r = solve_eed_inpainting(mask, f, EedParams{}, cfg);
    CHECK(r.iterations == 7);
    CHECK(!r.converged);
  }
}

TEST_CASE("inpainter front end") {
  const Image f = synth_image("steps", 12, 12);
  Mask mask(12, 12);
  for (std::size_t i = 0; i < mask.size(); i += 5) mask.set(i, true);
  const Inpainter hom(OperatorKind::Homogeneous, 12, 12);
  CHECK(hom(mask, f) == solve_linear_inpainting(mask, f, assemble_laplacian(12, 12)));
  const Inpainter eed(OperatorKind::Eed, 12, 12);
  CHECK_THROWS_AS(eed.linear_operator(), ValidationError);
  CHECK(eed(mask, f) == solve_eed_inpainting(mask, f, EedParams{}).u);
  CHECK_THROWS_AS(hom(Mask(12, 12), f), ValidationError);
  CHECK_THROWS_AS(hom(Mask(5, 5, true), f), ValidationError);
  SolverConfig bad;
  bad.rel_residual_tol = 0.0;
  CHECK_THROWS_AS(Inpainter(OperatorKind::Homogeneous, 4, 4, EedParams{}, bad), ValidationError);
}
