#include <doctest.h>

#include <cmath>
#include <complex>

#include "honls/spectral.hpp"

using namespace honls;

TEST_CASE("grid validation rejects bad parameters") {
  CHECK_THROWS_AS(make_grid(0, 64, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(4, 64, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 65, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 4, 10.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 64, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_grid(1, 64, -3.0), std::invalid_argument);
  GridSpec g = make_grid(2, 64, 12.5);
  CHECK(g.dim == 2);
  CHECK(g.size() == 64u * 64u);
  CHECK(g.dx() == doctest::Approx(12.5 / 64).epsilon(1e-15));
}

TEST_CASE("wavenumber layout: non-negative first, then negative") {
  GridSpec g = make_grid(1, 8, 2 * pi);
  const int expect[8] = {0, 1, 2, 3, -4, -3, -2, -1};
  for (int i = 0; i < 8; ++i) {
    CHECK(g.signed_index(i) == expect[i]);
    CHECK(g.xi(i) == doctest::Approx(double(expect[i])).epsilon(1e-15));
  }
  CHECK(g.coord(0) == 0.0);
  CHECK(g.coord(4) == doctest::Approx(-pi).epsilon(1e-15));
}

TEST_CASE("forward transform of a single plane wave concentrates on one mode") {
  GridSpec g = make_grid(1, 64, 10.0);
  Field u(g, Space::physical, Reality::complex_valued);
  const double k0 = 2 * pi * 3 / g.box;
  for_each_point(g, [&](std::size_t i, const double* x) {
    u[i] = std::polar(1.0, k0 * x[0]);
  });
  Field uh = transform(u, Space::fourier);
  for (int i = 0; i < g.n; ++i) {
    if (g.signed_index(i) == 3)
      CHECK(std::abs(uh[i] - std::complex<double>(g.box, 0.0)) < 1e-12 * g.box);
    else
      CHECK(std::abs(uh[i]) < 1e-12 * g.box);
  }
}

TEST_CASE("Parseval identity holds in the chosen normalization") {
  for (int dim : {1, 2, 3}) {
    GridSpec g = make_grid(dim, dim == 3 ? 16 : 64, 7.5);
    Field u = random_smooth_field(g, 42, 4.0);
    double phys = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) phys += std::norm(u[i]);
    phys *= g.cell_volume();
    Field uh = transform(u, Space::fourier);
    double four = 0.0;
    for (std::size_t i = 0; i < uh.size(); ++i) four += std::norm(uh[i]);
    four *= g.fourier_weight();
    CHECK(phys == doctest::Approx(four).epsilon(1e-12));
  }
}

TEST_CASE("transform round trip is lossless to machine precision") {
  GridSpec g = make_grid(2, 32, 5.0);
  Field u = random_smooth_field(g, 7, 3.0);
  Field back = transform(transform(u, Space::fourier), Space::physical);
  double err = 0.0, amp = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    err = std::max(err, std::abs(u[i] - back[i]));
    amp = std::max(amp, std::abs(u[i]));
  }
  CHECK(err < 1e-13 * amp);
}

TEST_CASE("transform to the current space is rejected") {
  GridSpec g = make_grid(1, 16, 1.0);
  Field u(g, Space::physical, Reality::real_valued);
  CHECK_THROWS_AS((void)transform(u, Space::physical), std::invalid_argument);
  CHECK(ensure_space(u, Space::physical).space() == Space::physical);
  CHECK(ensure_space(u, Space::fourier).space() == Space::fourier);
}
