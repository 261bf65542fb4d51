#include <doctest.h>

#include <cmath>
#include <complex>

#include "honls/groundstate.hpp"

using namespace honls;

namespace {

Field gaussian(const GridSpec& g, double sigma, double amp) {
  Field f(g, Space::physical, Reality::real_valued);
  for_each_point(g, [&](std::size_t i, const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += x[a] * x[a];
    f[i] = amp * std::exp(-r2 / (2 * sigma * sigma));
  });
  return f;
}

SolverConfig quiet_config() {
  SolverConfig cfg;
  cfg.log_iterations = true;
  return cfg;
}

} // namespace

TEST_CASE("problem construction validates nonlinearity and symbol") {
  GridSpec g = make_grid(3, 16, 20.0);
  CHECK_THROWS_AS(GroundStateProblem(g, DispersionSymbol::laplacian(),
                                     NonlinearityKind::power(2)),
                  std::invalid_argument);
  auto bad = DispersionSymbol::higher_order_radial(0.1, {{2, -1.0}});
  CHECK_THROWS_AS(
      GroundStateProblem(make_grid(1, 64, 20.0), bad, NonlinearityKind::power(1)),
      std::invalid_argument);
}

TEST_CASE("action, Nehari scaling and gradient are mutually consistent") {
  GridSpec g = make_grid(1, 256, 30.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  Field u = gaussian(g, 1.2, 1.0);
  const double t = nehari_scale(u, prob);
  Field tu = u;
  for (auto& z : tu.values()) z *= t;
  // on the manifold: <I'(tu), tu> = 0, i.e. ||tu||^2 = (p+1) N(tu)
  Field th = ensure_space(tu, Space::fourier);
  const double hp2 =
      std::pow(norm_weighted(th, prob.tables().one_plus_p), 2);
  CHECK(hp2 == doctest::Approx(4 * potential_energy(tu, prob.kind))
                   .epsilon(1e-12));
  CHECK(action(tu, prob) ==
        doctest::Approx(0.5 * hp2 - potential_energy(tu, prob.kind))
            .epsilon(1e-12));

  // directional derivative of the action along a random direction
  Field dir(g, Space::physical, Reality::real_valued);
  for_each_point(g, [&](std::size_t i, const double* x) {
    dir[i] = std::exp(-x[0] * x[0]) * std::sin(x[0]);
  });
  Field grad = sobolev_gradient(u, prob);
  const double h = 1e-6;
  Field up = u, um = u;
  for (std::size_t i = 0; i < u.size(); ++i) {
    up[i] += h * dir[i];
    um[i] -= h * dir[i];
  }
  const double fd = (action(up, prob) - action(um, prob)) / (2 * h);
  const std::complex<double> ip = inner_product_weighted(
      ensure_space(grad, Space::fourier), ensure_space(dir, Space::fourier),
      prob.tables().one_plus_p);
  CHECK(fd == doctest::Approx(ip.real()).epsilon(1e-7));
}

TEST_CASE("cubic ground state reproduces the explicit soliton") {
  GridSpec g = make_grid(1, 512, 40.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  GroundStateResult res = minimize(prob, gaussian(g, 1.5, 1.2), quiet_config());
  REQUIRE(res.converged);
  CHECK(res.gradient_residual < 1e-10);
  CHECK(res.nehari_residual < 1e-12);
  CHECK(res.action == doctest::Approx(4.0 / 3.0).epsilon(1e-9));
  CHECK(res.pde_residual_rel < 1e-10);
  CHECK_FALSE(res.under_resolved);
  CHECK(res.boundary_amplitude < 1e-7);

  double err = 0.0;
  for_each_point(g, [&](std::size_t i, const double* x) {
    err = std::max(err,
                   std::abs(res.Q[i].real() - std::sqrt(2.0) / std::cosh(x[0])));
  });
  CHECK(err < 1e-7);
  CHECK(sobolev_norm(res.Q, 0.0) == doctest::Approx(2.0).epsilon(1e-8));

  // action identities: I = (p-1)/(2(p+1)) ||Q||^2 = (p-1)/2 N
  Field qh = ensure_space(res.Q, Space::fourier);
  const double hp2 = std::pow(norm_weighted(qh, prob.tables().one_plus_p), 2);
  const double nq = potential_energy(res.Q, prob.kind);
  CHECK(res.action == doctest::Approx(hp2 / 4.0).epsilon(1e-10));
  CHECK(res.action == doctest::Approx(nq).epsilon(1e-10));

  // iteration log: action non-increasing up to floating noise
  REQUIRE(res.log.size() > 2);
  for (std::size_t i = 1; i < res.log.size(); ++i)
    CHECK(res.log[i].action <=
          res.log[i - 1].action + 1e-12 * std::max(1.0, std::abs(res.log[i - 1].action)));
}

TEST_CASE("quintic ground state reproduces the closed-form profile") {
  GridSpec g = make_grid(1, 512, 40.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(2));
  GroundStateResult res = minimize(prob, gaussian(g, 1.0, 1.3), quiet_config());
  REQUIRE(res.converged);
  CHECK(res.action == doctest::Approx(std::sqrt(3.0) * pi / 4.0).epsilon(1e-9));
  double err = 0.0;
  for_each_point(g, [&](std::size_t i, const double* x) {
    const double exact = std::pow(3.0, 0.25) / std::sqrt(std::cosh(2 * x[0]));
    err = std::max(err, std::abs(res.Q[i].real() - exact));
  });
  CHECK(err < 1e-7);
}

TEST_CASE("multistart minimization is deterministic") {
  GridSpec g = make_grid(1, 256, 30.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  SolverConfig cfg = quiet_config();
  cfg.multistart = 3;
  cfg.seed = 77;
  GroundStateResult a = minimize(prob, std::nullopt, cfg);
  GroundStateResult b = minimize(prob, std::nullopt, cfg);
  REQUIRE(a.converged);
  CHECK(a.starts_used == 3);
  CHECK(a.action == b.action);
  for (std::size_t i = 0; i < a.Q.size(); ++i) {
    CHECK(a.Q[i].real() == b.Q[i].real());
    CHECK(a.Q[i].imag() == b.Q[i].imag());
  }
}

TEST_CASE("2D cubic ground state satisfies the scaling identities") {
  GridSpec g = make_grid(2, 128, 30.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  SolverConfig cfg = quiet_config();
  GroundStateResult res = minimize(prob, gaussian(g, 1.3, 1.4), cfg);
  REQUIRE(res.converged);
  // d=2 cubic: ||grad u||^2 = ||u||^2 = 2N
  const double l2 = std::pow(sobolev_norm(res.Q, 0.0), 2);
  const double h1 = std::pow(sobolev_norm(res.Q, 1.0), 2);
  const double grad2 = h1 - l2;
  const double nq = potential_energy(res.Q, prob.kind);
  CHECK(grad2 == doctest::Approx(l2).epsilon(1e-6));
  CHECK(grad2 == doctest::Approx(2 * nq).epsilon(1e-6));
  // radial profile: symmetrization is a fixed point
  Field s = symmetrize_radial(res.Q);
  double err = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i)
    err = std::max(err, std::abs(s[i] - res.Q[i]));
  CHECK(err < 1e-8 * max_abs(res.Q));
}

TEST_CASE("higher-order quartic symbol shifts the ground state action") {
  GridSpec g = make_grid(1, 256, 40.0);
  auto sym = DispersionSymbol::higher_order_radial(0.1, {{2, 1.0}});
  GroundStateProblem prob(g, sym, NonlinearityKind::power(1));
  GroundStateResult res = minimize(prob, gaussian(g, 1.5, 1.2), quiet_config());
  REQUIRE(res.converged);
  // the quartic term raises the quadratic form, so the action exceeds 4/3
  CHECK(res.action > 4.0 / 3.0);
  CHECK(res.action < 1.5);
  CHECK(res.gradient_residual < 1e-10);
}

TEST_CASE("alignment recovers phase and translation") {
  GridSpec g = make_grid(1, 256, 30.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  GroundStateResult res = minimize(prob, gaussian(g, 1.5, 1.2), quiet_config());
  REQUIRE(res.converged);
  Field ref = res.Q;

  SUBCASE("integer-cell shift with phase") {
    const double a[3] = {5 * g.dx(), 0.0, 0.0};
    Field moved = shift_and_phase(ref, a, pi / 3.0);
    AlignmentResult al = align(moved, ref, DispersionSymbol::laplacian());
    CHECK(al.theta == doctest::Approx(-pi / 3.0).epsilon(1e-9));
    CHECK(al.shift[0] == doctest::Approx(-5 * g.dx()).epsilon(1e-9));
    CHECK(al.residual < 1e-9);
  }
  SUBCASE("sub-cell shift") {
    const double a[3] = {2.3 * g.dx(), 0.0, 0.0};
    Field moved = shift_and_phase(ref, a, -0.4);
    AlignmentResult al = align(moved, ref, DispersionSymbol::laplacian());
    CHECK(al.shift[0] == doctest::Approx(-2.3 * g.dx()).epsilon(1e-7));
    CHECK(al.theta == doctest::Approx(0.4).epsilon(1e-7));
    CHECK(al.residual < 1e-8);
  }
  SUBCASE("imaginary component of the aligned pairing vanishes") {
    const double a[3] = {1.7 * g.dx(), 0.0, 0.0};
    Field moved = shift_and_phase(ref, a, 0.9);
    AlignmentResult al = align(moved, ref, DispersionSymbol::laplacian());
    const std::complex<double> ip = inner_product_weighted(
        ensure_space(al.aligned, Space::fourier),
        ensure_space(ref, Space::fourier), prob.tables().one_plus_p);
    CHECK(std::abs(ip.imag()) < 1e-12 * std::abs(ip.real()));
  }
}

TEST_CASE("alignment rejects a vanishing input field") {
  GridSpec g = make_grid(1, 128, 20.0);
  Field ref(g, Space::physical, Reality::real_valued);
  for_each_point(g, [&](std::size_t i, const double* x) {
    ref[i] = std::exp(-x[0] * x[0]);
  });
  Field zero(g, Space::physical, Reality::real_valued);
  CHECK_THROWS_AS((void)align(zero, ref, DispersionSymbol::laplacian()),
                  std::invalid_argument);
}

TEST_CASE("initial guess with vanishing potential energy is rejected") {
  GridSpec g = make_grid(1, 128, 20.0);
  GroundStateProblem prob(g, DispersionSymbol::laplacian(),
                          NonlinearityKind::power(1));
  Field zero(g, Space::physical, Reality::real_valued);
  CHECK_THROWS_AS((void)minimize(prob, zero, quiet_config()),
                  std::invalid_argument);
}
