#include "honls/symbols.hpp"

#include <cmath>
#include <cstdio>

namespace honls {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void check_mc(double m, double c) {
  if (!(m > 0.0) || !std::isfinite(m))
    throw std::invalid_argument("symbol: mass must be positive");
  if (!(c > 0.0) || !std::isfinite(c))
    throw std::invalid_argument("symbol: light speed must be positive");
}

} // namespace

std::vector<double> relativistic_coefficients(int J) {
  if (J < 1 || J > 20)
    throw std::invalid_argument("relativistic_coefficients: J must be in [1, 20]");
  std::vector<double> a(J);
  a[0] = 0.5;
  for (int j = 1; j < J; ++j)
    a[j] = a[j - 1] * (2.0 * j - 1.0) / (2.0 * j + 2.0);
  return a;
}

DispersionSymbol DispersionSymbol::laplacian() {
  DispersionSymbol s;
  s.variant_ = Variant::laplacian;
  return s;
}

DispersionSymbol DispersionSymbol::higher_order_radial(double eps,
                                                       std::vector<RadialTerm> terms) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("higher_order_radial: eps must be >= 0");
  for (const auto& t : terms) {
    if (t.order < 2 || t.order > 10)
      throw std::invalid_argument("higher_order_radial: term order must be in [2, 10]");
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("higher_order_radial: non-finite coefficient");
  }
  DispersionSymbol s;
  s.variant_ = Variant::higher_order_radial;
  s.eps_ = eps;
  s.radial_ = std::move(terms);
  if (eps > 0.0 && !s.radial_.empty()) {
    int top = 0;
    double top_coeff = 0.0;
    for (const auto& t : s.radial_) {
      if (t.order > top) { top = t.order; top_coeff = t.coeff; }
      else if (t.order == top) top_coeff += t.coeff;
    }
    s.tail_negative_ = top_coeff < 0.0;
  }
  return s;
}

DispersionSymbol DispersionSymbol::higher_order_aniso(double eps,
                                                      std::vector<AnisoTerm> terms) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw std::invalid_argument("higher_order_aniso: eps must be >= 0");
  for (const auto& t : terms) {
    int order = t.alpha[0] + t.alpha[1] + t.alpha[2];
    for (int a : t.alpha)
      if (a < 0) throw std::invalid_argument("higher_order_aniso: negative multi-index");
    if (order % 2 != 0)
      throw std::invalid_argument(
          "higher_order_aniso: odd multi-index order rejected (real-valued "
          "solutions require even symbols)");
    if (order < 4 || order > 10)
      throw std::invalid_argument("higher_order_aniso: |alpha| must be even in [4, 10]");
    if (!std::isfinite(t.coeff))
      throw std::invalid_argument("higher_order_aniso: non-finite coefficient");
  }
  DispersionSymbol s;
  s.variant_ = Variant::higher_order_aniso;
  s.eps_ = eps;
  s.aniso_ = std::move(terms);
  if (eps > 0.0 && !s.aniso_.empty()) {
    // sample the top-order homogeneous form over lattice directions
    int top = 0;
    for (const auto& t : s.aniso_)
      top = std::max(top, t.alpha[0] + t.alpha[1] + t.alpha[2]);
    double minform = 0.0;
    for (int i = -4; i <= 4; ++i)
      for (int j = -4; j <= 4; ++j)
        for (int k = -4; k <= 4; ++k) {
          if (i == 0 && j == 0 && k == 0) continue;
          double r = std::sqrt(double(i * i + j * j + k * k));
          double d[3] = {i / r, j / r, k / r};
          double form = 0.0;
          for (const auto& t : s.aniso_) {
            if (t.alpha[0] + t.alpha[1] + t.alpha[2] != top) continue;
            form += t.coeff * ipow(d[0], t.alpha[0]) * ipow(d[1], t.alpha[1]) *
                    ipow(d[2], t.alpha[2]);
          }
          minform = std::min(minform, form);
        }
    s.tail_negative_ = minform < 0.0;
  }
  return s;
}

DispersionSymbol DispersionSymbol::relativistic_truncation(double m, double c, int J) {
  check_mc(m, c);
  std::vector<double> alpha = relativistic_coefficients(J);
  DispersionSymbol s;
  s.variant_ = Variant::relativistic_truncation;
  s.m_ = m;
  s.c_ = c;
  s.J_ = J;
  s.trunc_coeffs_.resize(J);
  for (int j = 1; j <= J; ++j) {
    double denom = ipow(m, 2 * j - 1) * ipow(c, 2 * j - 2);
    s.trunc_coeffs_[j - 1] = (j % 2 == 1 ? 1.0 : -1.0) * alpha[j - 1] / denom;
  }
  s.tail_negative_ = (J % 2 == 0); // even truncations turn down at large |xi|
  return s;
}

DispersionSymbol DispersionSymbol::pseudo_relativistic(double m, double c) {
  check_mc(m, c);
  DispersionSymbol s;
  s.variant_ = Variant::pseudo_relativistic;
  s.m_ = m;
  s.c_ = c;
  return s;
}

double DispersionSymbol::eval(const double* xi, int dim) const {
  double s = 0.0;
  for (int a = 0; a < dim; ++a) s += xi[a] * xi[a];
  switch (variant_) {
    case Variant::laplacian:
      return s;
    case Variant::higher_order_radial: {
      double p = s;
      for (const auto& t : radial_)
        p += t.coeff * ipow(eps_, 2 * t.order - 2) * ipow(s, t.order);
      return p;
    }
    case Variant::higher_order_aniso: {
      double p = s;
      for (const auto& t : aniso_) {
        int order = t.alpha[0] + t.alpha[1] + t.alpha[2];
        double mono = 1.0;
        for (int a = 0; a < 3; ++a) mono *= ipow(a < dim ? xi[a] : 0.0, t.alpha[a]);
        p += t.coeff * ipow(eps_, order - 2) * mono;
      }
      return p;
    }
    case Variant::relativistic_truncation: {
      // Horner in s = |xi|^2
      double p = 0.0;
      for (int j = J_ - 1; j >= 0; --j) p = p * s + trunc_coeffs_[j];
      return p * s;
    }
    case Variant::pseudo_relativistic: {
      // sqrt(c^2 s + m^2 c^4) - m c^2, cancellation-free
      const double mc2 = m_ * c_ * c_;
      return c_ * c_ * s / (std::sqrt(c_ * c_ * s + mc2 * mc2) + mc2);
    }
  }
  return 0.0;
}

std::string DispersionSymbol::describe() const {
  char buf[160];
  switch (variant_) {
    case Variant::laplacian:
      return "laplacian";
    case Variant::higher_order_radial: {
      std::string out = "higher_order_radial eps=";
      std::snprintf(buf, sizeof buf, "%.17g", eps_);
      out += buf;
      for (const auto& t : radial_) {
        std::snprintf(buf, sizeof buf, " + %.17g eps^%d |xi|^%d", t.coeff,
                      2 * t.order - 2, 2 * t.order);
        out += buf;
      }
      return out;
    }
    case Variant::higher_order_aniso: {
      std::string out = "higher_order_aniso eps=";
      std::snprintf(buf, sizeof buf, "%.17g", eps_);
      out += buf;
      for (const auto& t : aniso_) {
        std::snprintf(buf, sizeof buf, " + %.17g eps^%d xi^(%d,%d,%d)", t.coeff,
                      t.alpha[0] + t.alpha[1] + t.alpha[2] - 2, t.alpha[0],
                      t.alpha[1], t.alpha[2]);
        out += buf;
      }
      return out;
    }
    case Variant::relativistic_truncation:
      std::snprintf(buf, sizeof buf, "relativistic_truncation m=%.17g c=%.17g J=%d",
                    m_, c_, J_);
      return buf;
    case Variant::pseudo_relativistic:
      std::snprintf(buf, sizeof buf, "pseudo_relativistic m=%.17g c=%.17g", m_, c_);
      return buf;
  }
  return "";
}

EllipticityReport ellipticity_gamma(const DispersionSymbol& sym, const GridSpec& grid) {
  EllipticityReport rep;
  rep.gamma = std::numeric_limits<double>::infinity();
  for_each_mode(grid, [&](std::size_t, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) xi2 += xi[a] * xi[a];
    const double ratio = (1.0 + sym.eval(xi, grid.dim)) / (1.0 + xi2);
    if (ratio < rep.gamma) {
      rep.gamma = ratio;
      for (int a = 0; a < 3; ++a) rep.argmin[a] = a < grid.dim ? xi[a] : 0.0;
    }
  });
  rep.lattice_pass = rep.gamma > 0.0;
  rep.tail_negative = sym.tail_negative();
  rep.pass = rep.lattice_pass && !rep.tail_negative;
  return rep;
}

PositivityReport verify_positivity_lemma(double m, double c, int k,
                                         const GridSpec& grid) {
  check_mc(m, c);
  if (k < 1)
    throw std::invalid_argument("verify_positivity_lemma: k must be >= 1");
  const int J = 2 * k - 1;
  if (J > 20)
    throw std::invalid_argument("verify_positivity_lemma: truncation order exceeds 20");
  DispersionSymbol trunc = DispersionSymbol::relativistic_truncation(m, c, J);
  PositivityReport rep;
  rep.min_ratio = std::numeric_limits<double>::infinity();
  for_each_mode(grid, [&](std::size_t, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) xi2 += xi[a] * xi[a];
    if (xi2 == 0.0) return;
    const double ratio = trunc.eval(xi, grid.dim) / (xi2 / (2.0 * m));
    if (ratio < rep.min_ratio) {
      rep.min_ratio = ratio;
      for (int a = 0; a < 3; ++a) rep.argmin[a] = a < grid.dim ? xi[a] : 0.0;
    }
  });
  rep.pass = rep.min_ratio >= 1.0 - 1e-10;
  return rep;
}

double relativistic_truncation_remainder(double m, double c, int J, double s) {
  check_mc(m, c);
  if (J < 1 || J > 20)
    throw std::invalid_argument("truncation remainder: J must be in [1, 20]");
  if (!(s > 0.0))
    throw std::invalid_argument("truncation remainder: s must be positive");
  const double mc2 = m * c * c;
  const double x = s / (m * m * c * c);
  if (x <= 0.25) {
    // tail of the convergent series: mc^2 sum_{j>J} (-1)^{j-1} alpha_j x^j
    double alpha = 0.5;
    for (int j = 1; j < J + 1; ++j) alpha *= (2.0 * j - 1.0) / (2.0 * j + 2.0);
    // alpha now holds alpha_{J+1}
    double term = (J % 2 == 0 ? 1.0 : -1.0) * alpha * std::pow(x, J + 1);
    double sum = 0.0;
    for (int j = J + 1; j <= J + 200; ++j) {
      sum += term;
      term *= -x * (2.0 * j - 1.0) / (2.0 * j + 2.0);
      if (std::abs(term) < 1e-18 * std::abs(sum)) break;
    }
    return std::abs(mc2 * sum);
  }
  // direct evaluation in extended precision; cancellation is mild for x > 1/4
  const long double ls = s, lm = m, lc = c;
  const long double lmc2 = lm * lc * lc;
  long double full = lc * lc * ls / (sqrtl(lc * lc * ls + lmc2 * lmc2) + lmc2);
  long double alpha = 0.5L, partial = 0.0L, spow = ls;
  long double mpow = lm, cpow = 1.0L;
  for (int j = 1; j <= J; ++j) {
    partial += (j % 2 == 1 ? 1.0L : -1.0L) * alpha * spow / (mpow * cpow);
    alpha *= (2.0L * j - 1.0L) / (2.0L * j + 2.0L);
    spow *= ls;
    mpow *= lm * lm;
    cpow *= lc * lc;
  }
  return static_cast<double>(fabsl(full - partial));
}

TaylorRemainderReport taylor_remainder_ratio(double m, double c, int J,
                                             double s_max, int samples) {
  if (!(s_max > 0.0) || !std::isfinite(s_max))
    throw std::invalid_argument("taylor_remainder_ratio: s_max must be positive");
  if (samples < 2)
    throw std::invalid_argument("taylor_remainder_ratio: need at least 2 samples");
  TaylorRemainderReport rep;
  rep.samples = samples;
  // log-spaced samples spanning eight decades below s_max
  for (int i = 0; i < samples; ++i) {
    const double t = static_cast<double>(i) / (samples - 1);
    const double s = s_max * std::pow(10.0, -8.0 * (1.0 - t));
    const double rem = relativistic_truncation_remainder(m, c, J, s);
    const double ratio = rem / (std::pow(s, J + 1) / ipow(c, 2 * J));
    if (ratio > rep.sup_ratio) {
      rep.sup_ratio = ratio;
      rep.argmax_s = s;
    }
  }
  return rep;
}

} // namespace honls
