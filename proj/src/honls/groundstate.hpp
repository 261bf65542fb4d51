#pragma once

// Variational ground states on the Nehari manifold: action functional,
// constraint scaling, Sobolev-gradient descent, and alignment modulo
// translation and phase.

#include <memory>
#include <optional>

#include "honls/nonlinearity.hpp"
#include "honls/symbols.hpp"

namespace honls {

// Per-(grid, symbol) multiplier tables shared by the solvers.
struct ProblemTables {
  std::vector<double> p;
  std::vector<double> one_plus_p;
  std::vector<double> inv_one_plus_p;
  std::vector<double> inv_sqrt_one_plus_p;
  std::vector<double> xi2;
  std::vector<double> one_plus_xi2;
};

std::shared_ptr<const ProblemTables> build_tables(const GridSpec& g,
                                                  const DispersionSymbol& sym);

struct GroundStateProblem {
  GridSpec grid;
  DispersionSymbol symbol;
  NonlinearityKind kind;

  // validates admissibility and ellipticity, then precomputes tables
  GroundStateProblem(const GridSpec& g, const DispersionSymbol& s,
                     const NonlinearityKind& k);

  const ProblemTables& tables() const { return *tables_; }

private:
  std::shared_ptr<const ProblemTables> tables_;
};

struct SolverConfig {
  double grad_tol = 1e-10;   // terminate on ||I'(u)||_{H^-1}
  double nehari_tol = 1e-12;
  int max_iters = 5000;
  int multistart = 3;        // seeded initial guesses when no init is given
  std::uint64_t seed = 1234;
  double tail_threshold = 1e-8;
  int workers = 1;
  bool dealias = false;
  double dealias_fraction = 0.0; // 0 selects 2/(p+1)
  bool log_iterations = true;
};

struct IterationRow {
  int iter = 0;
  double action = 0.0;
  double residual = 0.0;
  double step = 0.0;
};

struct GroundStateResult {
  Field Q;
  double action = 0.0;
  double nehari_residual = 0.0;  // |<I'(Q),Q>| / ||Q||^2_{H1_P}
  double gradient_residual = 0.0; // ||I'(Q)||_{H^-1}
  double pde_residual_rel = 0.0;  // ||(P+1)Q - N'(Q)||_{H^-1} / ||Q||_{H^1}
  int iterations = 0;
  double boundary_amplitude = 0.0;
  bool converged = false;
  bool under_resolved = false;
  double tail_fraction = 0.0;
  int starts_used = 1;
  std::string message;
  std::vector<IterationRow> log;
};

struct AlignmentResult {
  double theta = 0.0;
  std::array<double, 3> shift{0.0, 0.0, 0.0};
  Field aligned;
  double residual = 0.0; // H1_P distance to the reference after alignment
};

// I(u) = (1/2)||u||^2_{H1_P} - N(u)
double action(const Field& u, const GroundStateProblem& problem);

// t with <I'(tu), tu> = 0; requires N(u) > 0
double nehari_scale(const Field& u, const GroundStateProblem& problem);

// u - (P+1)^{-1} N'(u), the gradient of I in the H1_P metric
Field sobolev_gradient(const Field& u, const GroundStateProblem& problem);

// Nehari-projected descent with BB steps and backtracking; final iterate is
// gauge-fixed (real, positive maximum at the origin grid point).
GroundStateResult minimize(const GroundStateProblem& problem,
                           const std::optional<Field>& init,
                           const SolverConfig& cfg);

// Phase and shift minimizing ||e^{i theta} u(.-a) - reference||_{H1_P};
// integer-cell search refined by Newton on the correlation magnitude.
AlignmentResult align(const Field& u, const Field& reference,
                      const DispersionSymbol& metric_symbol);

// ||u - v||_{H1_P} in the metric of the given tables
double hp_distance(const Field& u, const Field& v, const ProblemTables& t);

} // namespace honls
