#include "honls/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace honls {

namespace {

// keep the real tag only when the physical values actually look real
void retag_real_if_dirty(Field& f) {
  if (f.reality() != Reality::real_valued || f.space() != Space::physical)
    return;
  double amp = 0.0, im = 0.0;
  for (const auto& z : f.values()) {
    amp = std::max(amp, std::abs(z));
    im = std::max(im, std::abs(z.imag()));
  }
  if (im > 1e-12 * std::max(amp, 1e-300)) f.set_reality(Reality::complex_valued);
}

double weight_pow(double base, double s) {
  // fast paths for the handful of integer orders the library uses
  if (s == 0.0) return 1.0;
  if (s == 1.0) return base;
  if (s == 2.0) return base * base;
  if (s == -1.0) return 1.0 / base;
  if (s == -2.0) return 1.0 / (base * base);
  return std::pow(base, s);
}

} // namespace

std::vector<double> lattice_table(const GridSpec& g, const SymbolFn& sym) {
  std::vector<double> t(g.size());
  for_each_mode(g, [&](std::size_t i, const double* xi) { t[i] = sym(xi, g.dim); });
  return t;
}

Field apply_multiplier_table(const Field& f, std::span<const double> table,
                             bool even_symbol) {
  if (table.size() != f.size())
    throw std::invalid_argument("apply_multiplier: table size does not match grid");
  Field hat = ensure_space(f, Space::fourier);
  for (std::size_t i = 0; i < table.size(); ++i) hat[i] *= table[i];
  hat.set_reality(even_symbol && f.reality() == Reality::real_valued
                      ? Reality::real_valued
                      : Reality::complex_valued);
  if (f.space() == Space::physical) {
    Field out = transform(hat, Space::physical);
    retag_real_if_dirty(out);
    return out;
  }
  return hat;
}

Field apply_multiplier(const Field& f, const SymbolFn& sym) {
  const GridSpec& g = f.grid();
  std::vector<double> t = lattice_table(g, sym);
  for (double v : t)
    if (!std::isfinite(v))
      throw std::invalid_argument("apply_multiplier: non-finite symbol value on lattice");
  double scale = 0.0;
  for (double v : t) scale = std::max(scale, std::abs(v));
  bool even = true;
  int ix[3];
  for (std::size_t i = 0; i < t.size() && even; ++i) {
    decode_index(g, i, ix);
    int neg[3];
    for (int a = 0; a < g.dim; ++a) neg[a] = g.negate(ix[a]);
    if (std::abs(t[i] - t[encode_index(g, neg)]) > 1e-12 * (1.0 + scale))
      even = false;
  }
  return apply_multiplier_table(f, t, even);
}

std::complex<double> inner_product_weighted(const Field& u, const Field& v,
                                            std::span<const double> one_plus_p) {
  if (u.grid() != v.grid())
    throw std::invalid_argument("inner product: grid mismatch");
  if (one_plus_p.size() != u.size())
    throw std::invalid_argument("inner product: weight table size mismatch");
  Field uh = ensure_space(u, Space::fourier);
  Field vh = ensure_space(v, Space::fourier);
  std::complex<double> acc{0.0, 0.0};
  for (std::size_t i = 0; i < uh.size(); ++i)
    acc += one_plus_p[i] * uh[i] * std::conj(vh[i]);
  return acc * u.grid().fourier_weight();
}

double norm_weighted(const Field& u, std::span<const double> one_plus_p) {
  if (one_plus_p.size() != u.size())
    throw std::invalid_argument("norm: weight table size mismatch");
  Field uh = ensure_space(u, Space::fourier);
  double acc = 0.0;
  for (std::size_t i = 0; i < uh.size(); ++i)
    acc += one_plus_p[i] * std::norm(uh[i]);
  return std::sqrt(std::max(0.0, acc * u.grid().fourier_weight()));
}

double sobolev_norm(const Field& u, double s) {
  if (s < -2.0)
    throw std::invalid_argument("sobolev_norm: order below -2 is unsupported");
  Field uh = ensure_space(u, Space::fourier);
  double acc = 0.0;
  for_each_mode(u.grid(), [&](std::size_t i, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < u.grid().dim; ++a) xi2 += xi[a] * xi[a];
    acc += weight_pow(1.0 + xi2, s) * std::norm(uh[i]);
  });
  return std::sqrt(std::max(0.0, acc * u.grid().fourier_weight()));
}

Field shift_and_phase(const Field& u, const double a[3], double theta) {
  const GridSpec& g = u.grid();
  Field hat = ensure_space(u, Space::fourier);
  const std::complex<double> rot = std::polar(1.0, theta);
  std::vector<std::complex<double>> ph[3];
  for (int ax = 0; ax < g.dim; ++ax) {
    ph[ax].resize(g.n);
    for (int i = 0; i < g.n; ++i) ph[ax][i] = std::polar(1.0, -g.xi(i) * a[ax]);
  }
  const int n = g.n;
  std::size_t idx = 0;
  if (g.dim == 1) {
    for (int i0 = 0; i0 < n; ++i0) hat[idx++] *= rot * ph[0][i0];
  } else if (g.dim == 2) {
    for (int i0 = 0; i0 < n; ++i0) {
      const std::complex<double> p0 = rot * ph[0][i0];
      for (int i1 = 0; i1 < n; ++i1) hat[idx++] *= p0 * ph[1][i1];
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      const std::complex<double> p0 = rot * ph[0][i0];
      for (int i1 = 0; i1 < n; ++i1) {
        const std::complex<double> p1 = p0 * ph[1][i1];
        for (int i2 = 0; i2 < n; ++i2) hat[idx++] *= p1 * ph[2][i2];
      }
    }
  }
  const double c = std::cos(theta);
  bool phase_real = std::abs(std::abs(c) - 1.0) < 1e-15;
  hat.set_reality(u.reality() == Reality::real_valued && phase_real
                      ? Reality::real_valued
                      : Reality::complex_valued);
  if (u.space() == Space::physical) {
    Field out = transform(hat, Space::physical);
    retag_real_if_dirty(out);
    return out;
  }
  return hat;
}

Field cyclic_shift(const Field& u, const int cells[3]) {
  Field phys = ensure_space(u, Space::physical);
  const GridSpec& g = u.grid();
  Field out(g, Space::physical, phys.reality());
  int ix[3], src[3];
  const int n = g.n;
  for (std::size_t i = 0; i < phys.size(); ++i) {
    decode_index(g, i, ix);
    for (int a = 0; a < g.dim; ++a)
      src[a] = ((ix[a] - cells[a]) % n + n) % n;
    out[i] = phys[encode_index(g, src)];
  }
  if (u.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field symmetrize_radial(const Field& u) {
  const GridSpec& g = u.grid();
  Field phys = ensure_space(u, Space::physical);
  static const int perms1[][3] = {{0, 1, 2}};
  static const int perms2[][3] = {{0, 1, 2}, {1, 0, 2}};
  static const int perms3[][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                  {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  const int (*perms)[3] = g.dim == 1 ? perms1 : (g.dim == 2 ? perms2 : perms3);
  const int nperm = g.dim == 1 ? 1 : (g.dim == 2 ? 2 : 6);
  const int nsign = 1 << g.dim;
  const double inv = 1.0 / (nperm * nsign);

  Field out(g, Space::physical, Reality::real_valued);
  int ix[3], jx[3];
  for (std::size_t i = 0; i < phys.size(); ++i) {
    decode_index(g, i, ix);
    double acc = 0.0;
    for (int p = 0; p < nperm; ++p) {
      for (int s = 0; s < nsign; ++s) {
        for (int a = 0; a < g.dim; ++a) {
          int v = ix[perms[p][a]];
          jx[a] = (s >> a) & 1 ? g.negate(v) : v;
        }
        acc += phys[encode_index(g, jx)].real();
      }
    }
    out[i] = acc * inv;
  }
  if (u.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field random_smooth_field(const GridSpec& g, std::uint64_t seed, double decay) {
  if (!(decay > g.dim / 2.0 + 1.0))
    throw std::invalid_argument("random_smooth_field: decay must exceed d/2 + 1");
  std::mt19937_64 eng(seed);
  Field hat(g, Space::fourier, Reality::complex_valued);
  for_each_mode(g, [&](std::size_t i, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < g.dim; ++a) xi2 += xi[a] * xi[a];
    const double mag = std::pow(1.0 + xi2, -0.5 * decay);
    const double u01 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
    hat[i] = std::polar(mag, 2.0 * pi * u01);
  });
  return transform(hat, Space::physical);
}

Field derivative(const Field& u, int axis) {
  const GridSpec& g = u.grid();
  if (axis < 0 || axis >= g.dim)
    throw std::invalid_argument("derivative: axis out of range");
  Field hat = ensure_space(u, Space::fourier);
  const int nyq = g.n / 2;
  int ix[3];
  for (std::size_t i = 0; i < hat.size(); ++i) {
    decode_index(g, i, ix);
    if (ix[axis] == nyq) {
      hat[i] = 0.0;
    } else {
      hat[i] *= std::complex<double>(0.0, g.xi(ix[axis]));
    }
  }
  hat.set_reality(u.reality());
  if (u.space() == Space::physical) {
    Field out = transform(hat, Space::physical);
    retag_real_if_dirty(out);
    return out;
  }
  return hat;
}

double spectral_tail_fraction(const Field& u, double s) {
  const GridSpec& g = u.grid();
  Field hat = ensure_space(u, Space::fourier);
  const int cut = (g.n + 2) / 3; // ceil(n/3)
  double total = 0.0, tail = 0.0;
  int ix[3];
  for_each_mode(g, [&](std::size_t i, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < g.dim; ++a) xi2 += xi[a] * xi[a];
    const double m = weight_pow(1.0 + xi2, s) * std::norm(hat[i]);
    total += m;
    decode_index(g, i, ix);
    for (int a = 0; a < g.dim; ++a) {
      if (std::abs(g.signed_index(ix[a])) >= cut) {
        tail += m;
        break;
      }
    }
  });
  return total > 0.0 ? tail / total : 0.0;
}

Field resample(const Field& u, int n_new) {
  const GridSpec& gin = u.grid();
  GridSpec gout = make_grid(gin.dim, n_new, gin.box);
  if (gout.n == gin.n) return u;
  Field hat = ensure_space(u, Space::fourier);
  Field out(gout, Space::fourier, u.reality());

  // Per-axis scatter map. Upsampling splits the source Nyquist line evenly
  // between +-n/2 (the real trigonometric interpolant); downsampling folds
  // +-n_new/2 back together. Up followed by down is then exact, and real
  // fields stay real both ways.
  struct Src {
    int idx[2] = {0, 0};
    double w[2] = {0.0, 0.0};
    int count = 0;
  };
  std::vector<Src> map(gout.n);
  const int half_in = gin.n / 2, half_out = gout.n / 2;
  for (int i = 0; i < gout.n; ++i) {
    const int k = gout.signed_index(i);
    Src& s = map[i];
    if (gout.n > gin.n) {
      if (std::abs(k) < half_in) {
        s.idx[0] = (k + gin.n) % gin.n;
        s.w[0] = 1.0;
        s.count = 1;
      } else if (k == half_in || k == -half_in) {
        s.idx[0] = half_in;
        s.w[0] = 0.5;
        s.count = 1;
      }
    } else {
      if (std::abs(k) < half_out) {
        s.idx[0] = (k + gin.n) % gin.n;
        s.w[0] = 1.0;
        s.count = 1;
      } else { // k == -half_out: fold the +-half_out source lines
        s.idx[0] = half_out;
        s.w[0] = 1.0;
        s.idx[1] = gin.n - half_out;
        s.w[1] = 1.0;
        s.count = 2;
      }
    }
  }

  int ix[3] = {0, 0, 0};
  for (std::size_t i = 0; i < out.size(); ++i) {
    decode_index(gout, i, ix);
    const Src* s[3];
    bool vanishes = false;
    int total = 1;
    for (int a = 0; a < gout.dim; ++a) {
      s[a] = &map[ix[a]];
      if (s[a]->count == 0) {
        vanishes = true;
        break;
      }
      total *= s[a]->count;
    }
    if (vanishes) {
      out[i] = 0.0;
      continue;
    }
    std::complex<double> acc{0.0, 0.0};
    for (int c = 0; c < total; ++c) {
      int rem = c, jx[3] = {0, 0, 0};
      double w = 1.0;
      for (int a = 0; a < gout.dim; ++a) {
        const int pick = rem % s[a]->count;
        rem /= s[a]->count;
        jx[a] = s[a]->idx[pick];
        w *= s[a]->w[pick];
      }
      acc += w * hat[encode_index(gin, jx)];
    }
    out[i] = acc;
  }
  if (u.space() == Space::physical) return transform(out, Space::physical);
  return out;
}

double max_abs(const Field& u) {
  double m = 0.0;
  for (const auto& z : u.values()) m = std::max(m, std::abs(z));
  return m;
}

double max_imag_abs(const Field& u) {
  double m = 0.0;
  for (const auto& z : u.values()) m = std::max(m, std::abs(z.imag()));
  return m;
}

} // namespace honls
