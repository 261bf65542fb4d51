#pragma once

// Dispersion symbols p(xi) and their verification: ellipticity constants,
// the odd-truncation positivity bound, and Taylor remainder ratios for the
// square-root symbol.

#include <array>
#include <string>
#include <vector>

#include "honls/grid.hpp"

namespace honls {

struct RadialTerm {
  int order = 2;      // contributes a * eps^{2 order - 2} |xi|^{2 order}
  double coeff = 0.0;
};

struct AnisoTerm {
  std::array<int, 3> alpha{0, 0, 0}; // |alpha| even >= 4
  double coeff = 0.0;                // contributes c * eps^{|alpha|-2} xi^alpha
};

class DispersionSymbol {
public:
  enum class Variant {
    laplacian,
    higher_order_radial,
    higher_order_aniso,
    relativistic_truncation,
    pseudo_relativistic,
  };

  static DispersionSymbol laplacian();
  // p = |xi|^2 + sum_j a_j eps^{2j-2} |xi|^{2j}; orders j >= 2
  static DispersionSymbol higher_order_radial(double eps,
                                              std::vector<RadialTerm> terms);
  // p = |xi|^2 + sum_alpha c_alpha eps^{|alpha|-2} xi^alpha; |alpha| even >= 4
  static DispersionSymbol higher_order_aniso(double eps,
                                             std::vector<AnisoTerm> terms);
  // p = sum_{j=1}^{J} (-1)^{j-1} alpha_j |xi|^{2j} / (m^{2j-1} c^{2j-2})
  static DispersionSymbol relativistic_truncation(double m, double c, int J);
  // p = sqrt(c^2|xi|^2 + m^2 c^4) - m c^2
  static DispersionSymbol pseudo_relativistic(double m, double c);

  Variant variant() const { return variant_; }
  double eps() const { return eps_; }
  double mass() const { return m_; }
  double light_speed() const { return c_; }
  int truncation_order() const { return J_; }
  const std::vector<RadialTerm>& radial_terms() const { return radial_; }
  const std::vector<AnisoTerm>& aniso_terms() const { return aniso_; }

  double eval(const double* xi, int dim) const;
  // true when the leading-order behaviour is negative in some direction, so
  // the symbol is unbounded below regardless of lattice resolution
  bool tail_negative() const { return tail_negative_; }
  std::string describe() const;

private:
  DispersionSymbol() = default;
  Variant variant_ = Variant::laplacian;
  double eps_ = 0.0;
  double m_ = 1.0, c_ = 1.0;
  int J_ = 0;
  std::vector<RadialTerm> radial_;
  std::vector<AnisoTerm> aniso_;
  std::vector<double> trunc_coeffs_; // (-1)^{j-1} alpha_j / (m^{2j-1} c^{2j-2})
  bool tail_negative_ = false;
};

// alpha_j = (2j-2)!/(j!(j-1)! 2^{2j-1}) for j = 1..J, via the stable
// recurrence alpha_{j+1} = alpha_j (2j-1)/(2j+2); 1 <= J <= 20.
std::vector<double> relativistic_coefficients(int J);

struct EllipticityReport {
  double gamma = 0.0;             // lattice infimum of (1+p)/(1+|xi|^2)
  std::array<double, 3> argmin{}; // xi attaining it
  bool lattice_pass = false;      // gamma > 0
  bool tail_negative = false;     // leading-coefficient check for polynomials
  bool pass = false;              // lattice_pass && !tail_negative
};

EllipticityReport ellipticity_gamma(const DispersionSymbol& sym,
                                    const GridSpec& grid);

struct PositivityReport {
  double min_ratio = 0.0; // min over lattice xi != 0 of p_trunc / (|xi|^2/2m)
  std::array<double, 3> argmin{};
  bool pass = false; // min_ratio >= 1 - 1e-10
};

// Odd truncation J = 2k-1 dominates |xi|^2/(2m) pointwise; scans the lattice.
PositivityReport verify_positivity_lemma(double m, double c, int k,
                                         const GridSpec& grid);

struct TaylorRemainderReport {
  double sup_ratio = 0.0; // sup over samples of |remainder| / (s^{J+1}/c^{2J})
  double argmax_s = 0.0;
  int samples = 0;
};

// Samples s log-spaced on (0, s_max]; remainder of the degree-J truncation
// of sqrt(c^2 s + m^2 c^4) - m c^2, evaluated cancellation-free.
TaylorRemainderReport taylor_remainder_ratio(double m, double c, int J,
                                             double s_max, int samples);

// |remainder| at a single s (exposed for the truncation-consistency tests)
double relativistic_truncation_remainder(double m, double c, int J, double s);

} // namespace honls
