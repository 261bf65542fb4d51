#pragma once

// Potential energy N, its derivative N', the linearizations N± about a real
// profile, the truncated Coulomb convolution, and multilinear ratio checks.

#include "honls/spectral.hpp"

namespace honls {

class NonlinearityKind {
public:
  enum class Variant { power, hartree };

  static NonlinearityKind power(int k);
  // truncation radius <= 0 selects the default L/2 at kernel build time
  static NonlinearityKind hartree(double truncation_radius = 0.0);

  Variant variant() const { return variant_; }
  int k() const { return k_; }
  int order_p() const { return variant_ == Variant::power ? 2 * k_ + 1 : 3; }
  double truncation_radius() const { return radius_; }
  bool admissible(int dim) const;
  void require_admissible(int dim) const;
  std::string describe() const;

private:
  Variant variant_ = Variant::power;
  int k_ = 1;
  double radius_ = 0.0;
};

struct HartreeKernel {
  double radius = 0.0;
  std::vector<double> khat; // 4pi(1-cos(R|xi|))/|xi|^2, value 2pi R^2 at 0

  // cached per (grid, radius); safe to share between threads
  static const HartreeKernel& get(const GridSpec& g, double radius);
};

// N(u): power (1/(2k+2)) int |u|^{2k+2}; hartree (1/4) int (K*|u|^2)|u|^2.
double potential_energy(const Field& u, const NonlinearityKind& kind);

// N'(u): |u|^{2k} u, or (K*|u|^2) u.
Field nprime(const Field& u, const NonlinearityKind& kind);

// N+_u(g): (2k+1) u^{2k} g, or 2(K*(u g)) u + (K*u^2) g; u must be real.
Field nplus(const Field& u, const Field& g, const NonlinearityKind& kind);

// N-_u(g): u^{2k} g, or (K*u^2) g; u must be real.
Field nminus(const Field& u, const Field& g, const NonlinearityKind& kind);

// K * rho for real rho (d = 3 only); warns on stderr if rho dips below
// -1e-12 (quadrature noise tolerance).
Field hartree_potential(const Field& rho, double truncation_radius = 0.0);

// power: ||prod phi_j||_L2 / prod ||phi_j||_H1 over 2k+1 fields;
// hartree: ||(K*(phi1 phi2)) phi3||_L2 / prod ||phi_j||_H1 over 3 fields.
double multilinear_ratio(const std::vector<Field>& fields,
                         const NonlinearityKind& kind);

} // namespace honls
