#pragma once

// Constructive solver for the perturbed stationary equation. With Q0 a
// ground state of the base problem (-Lap + 1) Q0 = N'(Q0) and P the perturbed
// symbol, the correction r is the fixed point of
//   Phi(r) = (P + 1 - N+_{Q0})^{-1} [ (-Lap - P) Q0
//                                     + N'(Q0 + r) - N'(Q0) - N+_{Q0}(r) ],
// and u = Q0 + r then solves (P+1) u = N'(u) at the discrete level. The
// iteration runs on the radial real sector (reflection/permutation invariant
// fields), where the linearized-plus operator is invertible; the inner solve
// is MINRES on the bounded conjugate Id - A+ with the iterates re-projected
// onto the sector each step. delta_eps = (4/beta0) ||(-Lap - P) Q0||_{H^-1_P}
// is the radius of the ball in which the iteration provably contracts.

#include "honls/linearization.hpp"

namespace honls {

struct ContractionConfig {
  double fixed_point_tol = 1e-11; // H1_P norm of the update r_{n+1} - r_n
  int max_outer = 200;
  double inner_tol = 1e-12;       // relative residual of the linear solves
  int inner_max_iters = 2000;
  double beta0 = 0.0;             // <= 0 measures it at the base problem
  bool log_iterations = true;
};

struct ContractionLogRow {
  int iter = 0;
  double residual = 0.0; // ||r_n - r_{n-1}||_{H1_P}
  double factor = 0.0;   // residual_n / residual_{n-1}; 0 on the first row
};

struct ContractionResult {
  Field u;                // Q0 + r, radial real, physical space
  Field correction;       // r
  double delta_eps = 0.0;
  double beta0 = 0.0;     // value used in delta_eps
  double correction_norm = 0.0; // ||r||_{H1_P}
  double pde_residual = 0.0;    // ||(P+1)u - N'(u)||_{H^-1}, absolute
  int iterations = 0;
  bool converged = false;       // update below tolerance and PDE check passed
  bool pde_check = false;       // pde_residual < 10 * fixed_point_tol
  bool within_delta = false;    // correction_norm <= delta_eps
  bool factors_bounded = false; // every factor estimate <= 1
  bool geometric_decay = false; // factors <= 0.9 once updates fall below
                                // delta_eps
  std::string message;
  std::vector<ContractionLogRow> log;
};

struct LinearSolveReport {
  int iterations = 0;
  double relative_residual = 0.0; // recomputed from the returned solution
  bool converged = false;
};

// (4/beta0) ||(-Lap - P) Q0||_{H^-1_P}; the norm weight is 1/(1 + p(xi)).
// Q0 must be real and radial; the symbol must satisfy 1 + p > 0.
double delta_epsilon(const DispersionSymbol& symbol, const Field& Q0,
                     double beta0);

// Solve (P + 1 - N+_{Q0}) h = f on the radial real sector. f must be real
// and radial (within 1e-8 relative). Throws solver_failure mentioning
// "outside invertibility regime" when the iteration stalls, which is the
// runtime signature of epsilon beyond the invertible range.
Field solve_linearized_radial(const Field& f, const Field& Q0,
                              const DispersionSymbol& symbol,
                              const NonlinearityKind& kind,
                              const ContractionConfig& cfg,
                              LinearSolveReport* report = nullptr);

// One application of Phi; r must be real and radial on Q0's grid.
Field phi(const Field& r, const Field& Q0, const DispersionSymbol& symbol,
          const NonlinearityKind& kind, const ContractionConfig& cfg);

// Iterate r <- Phi(r) from r = 0 (or from r_init) until the H1_P update norm
// drops below cfg.fixed_point_tol. Q0 must solve the base problem (relative
// residual below 1e-6) and be radial; gauge-fix and center it first.
// Throws solver_failure mentioning "epsilon too large" when the factor
// estimates exceed 1 for five consecutive iterations.
ContractionResult contraction_solve(const Field& Q0,
                                    const DispersionSymbol& symbol,
                                    const NonlinearityKind& kind,
                                    const ContractionConfig& cfg);
ContractionResult contraction_solve(const Field& Q0,
                                    const DispersionSymbol& symbol,
                                    const NonlinearityKind& kind,
                                    const ContractionConfig& cfg,
                                    const Field& r_init);

} // namespace honls
