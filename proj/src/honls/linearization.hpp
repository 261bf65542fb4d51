#pragma once

// Diagnostics of the operators obtained by linearizing the stationary
// equation at a real profile u:
//   plus  sign: L+ g = (P+1) g - N+_u(g)   (real-direction perturbations)
//   minus sign: L- g = (P+1) g - N-_u(g)   (imaginary-direction perturbations)
// and their bounded conjugates A = (1+P)^{-1/2} N_u (1+P)^{-1/2}, so that
// L = sqrt(1+P) (Id - A) sqrt(1+P). The symmetry directions du/dx_j (plus)
// and u (minus) are the kernel candidates; beta measures the spectral gap of
// Id - A on their orthogonal complement.

#include "honls/groundstate.hpp"

namespace honls {

enum class LinSign { plus, minus };

// Frozen linearization point: multiplier tables plus the potentials of
// N^{sign}_u precomputed once, so repeated applies cost a few transforms.
// Immutable after construction; safe to share across threads.
class LinearizationPoint {
public:
  // u must be real-valued; the symbol must satisfy 1 + p > 0 on the lattice.
  LinearizationPoint(const Field& u, const DispersionSymbol& symbol,
                     const NonlinearityKind& kind);

  const GridSpec& grid() const { return grid_; }
  const ProblemTables& tables() const { return *tables_; }
  const NonlinearityKind& kind() const { return kind_; }
  const Field& profile() const { return u_; }
  // ||(P+1)u - N'(u)||_{H^-1} / ||u||_{H^1}, plain Sobolev weights
  double pde_residual() const { return pde_residual_; }

  // N^{sign}_u(g); complex-linear in g, returned in g's space
  Field nonlinear_part(LinSign sign, const Field& g) const;
  // L^{sign} g = (P+1) g - N^{sign}_u(g)
  Field linearized(LinSign sign, const Field& g) const;
  // A^{sign} g = (1+P)^{-1/2} N^{sign}_u((1+P)^{-1/2} g)
  Field sandwiched(LinSign sign, const Field& g) const;
  // multiplier (1+p)^{exponent/2} for exponent = +1 or -1
  Field sqrt_weight(const Field& g, int exponent) const;

private:
  GridSpec grid_;
  std::shared_ptr<const ProblemTables> tables_;
  NonlinearityKind kind_;
  Field u_;
  std::vector<double> sqrt_one_plus_p_;
  std::vector<double> pot_plus_;  // (2k+1) u^{2k}, or K*u^2
  std::vector<double> pot_minus_; // u^{2k}, or K*u^2
  double pde_residual_ = 0.0;
};

// One-shot conveniences; build a LinearizationPoint for repeated applies.
Field apply_linearized(LinSign sign, const Field& u, const Field& g,
                       const DispersionSymbol& symbol,
                       const NonlinearityKind& kind);
Field apply_sandwiched(LinSign sign, const Field& u, const Field& g,
                       const DispersionSymbol& symbol,
                       const NonlinearityKind& kind);

struct KernelResidualRow {
  LinSign sign = LinSign::plus;
  int axis = -1;         // derivative axis for plus rows, -1 for the u row
  double residual = 0.0; // ||L cand||_{H^-1} / ||cand||_{H^1}
};

struct KernelResidualReport {
  std::vector<KernelResidualRow> rows; // d plus rows, then the minus row
  double pde_residual = 0.0;
  bool solution_like = false; // pde_residual < 1e-4
  std::string message;
};

// Residuals of the symmetry directions under the linearized operators; small
// iff u solves the stationary equation to matching accuracy.
KernelResidualReport kernel_residuals(const Field& u,
                                      const DispersionSymbol& symbol,
                                      const NonlinearityKind& kind);

struct EigensolveOptions {
  double tol = 1e-9; // accept ||A v - mu v||_{L2} <= tol * max(1, |mu|)
  int max_iters = 600;
  std::uint64_t seed = 7;
};

struct SpectrumReport {
  LinSign sign = LinSign::plus;
  std::vector<double> kernel_residuals; // as in kernel_residuals(), this sign
  double beta = 0.0;        // min |1-mu| over computed non-kernel eigenvalues
  int negative_count = 0;   // computed eigenvalues of Id - A below zero
  std::vector<double> eigenvalues;     // eigenvalues mu of A, descending
  std::vector<double> residual_norms;  // recomputed ||A v - mu v||_{L2}
  std::vector<double> deflation_norms; // L2 norms of the deflated directions
  double max_deflation_overlap = 0.0;  // |<v_i, z_j>| after the solve
  int iterations = 0;
  int excluded_as_kernel = 0; // eigenvalues with |1-mu| below the gate
  double kernel_gate = 0.0;   // 10 * pde_residual of u
  double pde_residual = 0.0;
  bool converged = false;
  bool covered = false; // smallest computed mu <= 1 - beta, so no uncomputed
                        // eigenvalue can lie closer to 1
  bool non_degenerate = false; // converged && covered && beta > 0
  std::string message;
};

// Deflated block eigensolve for the largest eigenvalues of A^{sign}; beta is
// the distance from 1 to the computed spectrum off the symmetry directions.
// Deterministic for fixed options. Requires n_eigs >= dim + 2.
SpectrumReport beta_estimate(LinSign sign, const Field& u,
                             const DispersionSymbol& symbol,
                             const NonlinearityKind& kind, int n_eigs,
                             const EigensolveOptions& opt = {});

} // namespace honls
