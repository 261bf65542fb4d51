#include "honls/contraction.hpp"

#include <cmath>
#include <cstdio>
#include <utility>

#include "honls/fft.hpp"

namespace honls {
namespace {

Field zeros(const GridSpec& g) {
  return Field(g, Space::physical, Reality::real_valued);
}

// Real-sector arithmetic in physical space; every vector the solver touches
// has been through symmetrize_radial, which zeroes the imaginary part.
double rdot(const Field& a, const Field& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i].real() * b[i].real();
  return s * a.grid().cell_volume();
}

double rnorm(const Field& a) { return std::sqrt(rdot(a, a)); }

void raxpy(Field& y, double alpha, const Field& x) {
  for (std::size_t i = 0; i < y.size(); ++i)
    y[i] = y[i].real() + alpha * x[i].real();
}

void rscale(Field& x, double s) {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = s * x[i].real();
}

void require_real(const Field& f, const char* what) {
  if (f.reality() != Reality::real_valued) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s must be real-valued", what);
    throw std::invalid_argument(buf);
  }
}

// Relative L2 distance to the reflection/permutation-invariant sector.
double radial_defect(const Field& phys, const Field& sym) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < phys.size(); ++i) {
    const double d = phys[i].real() - sym[i].real();
    num += d * d;
    den += phys[i].real() * phys[i].real();
  }
  return den > 0.0 ? std::sqrt(num / den) : 0.0;
}

Field require_radial(const Field& f, const char* what) {
  Field phys = ensure_space(f, Space::physical);
  Field sym = symmetrize_radial(phys);
  if (radial_defect(phys, sym) > 1e-8) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%s must be radial", what);
    throw std::invalid_argument(buf);
  }
  return sym;
}

void validate_config(const ContractionConfig& cfg) {
  if (!(cfg.fixed_point_tol > 0.0) || !(cfg.inner_tol > 0.0))
    throw std::invalid_argument("contraction: tolerances must be positive");
  if (!(cfg.inner_tol < cfg.fixed_point_tol))
    throw std::invalid_argument(
        "contraction: inner tolerance must be below the fixed-point tolerance");
  if (cfg.max_outer < 1 || cfg.inner_max_iters < 1)
    throw std::invalid_argument(
        "contraction: iteration limits must be at least 1");
}

// B = Id - A+ restricted to the radial real sector.
Field apply_B(const LinearizationPoint& pt, const Field& v) {
  Field av = pt.sandwiched(LinSign::plus, v);
  Field w(v.grid(), Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = v[i].real() - av[i].real();
  return symmetrize_radial(w);
}

struct MinresStats {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
};

// MINRES (Lanczos + Givens QR) for the symmetric indefinite B. The conjugation
// by (1+P)^{-1/2} that produced B is the multiplier preconditioning; B itself
// is well-conditioned, so no further preconditioner is applied.
Field minres_radial(const LinearizationPoint& pt, const Field& b, double tol,
                    int maxit, MinresStats& st) {
  const GridSpec& g = b.grid();
  Field x = zeros(g);
  const double beta1 = rnorm(b);
  if (!std::isfinite(beta1))
    throw solver_failure("linearized solve: non-finite right-hand side");
  if (beta1 == 0.0) {
    st = {0, 0.0, true};
    return x;
  }

  Field v = b;
  rscale(v, 1.0 / beta1);
  Field v_old = zeros(g);
  Field w_old = zeros(g), w_older = zeros(g);
  double c_prev = 1.0, s_prev = 0.0, c_prev2 = 1.0, s_prev2 = 0.0;
  double beta_k = 0.0, taubar = beta1;
  double best_res = beta1;
  int best_iter = 0, iters = 0;
  bool converged = false;

  for (int k = 1; k <= maxit; ++k) {
    iters = k;
    Field z = apply_B(pt, v);
    const double alpha = rdot(v, z);
    raxpy(z, -alpha, v);
    if (beta_k != 0.0) raxpy(z, -beta_k, v_old);
    const double beta_next = rnorm(z);

    // previous two rotations applied to the new tridiagonal column
    const double eps_k = s_prev2 * beta_k;
    const double tmp = c_prev2 * beta_k;
    const double delta_k = c_prev * tmp + s_prev * alpha;
    const double gbar = -s_prev * tmp + c_prev * alpha;
    const double rho1 = std::hypot(gbar, beta_next);
    if (rho1 <= 1e-300) break; // singular projected system
    const double c_new = gbar / rho1, s_new = beta_next / rho1;

    Field wk = v;
    if (delta_k != 0.0) raxpy(wk, -delta_k, w_old);
    if (eps_k != 0.0) raxpy(wk, -eps_k, w_older);
    rscale(wk, 1.0 / rho1);

    raxpy(x, c_new * taubar, wk);
    taubar = -s_new * taubar;
    const double resid = std::abs(taubar);
    if (resid < best_res) {
      best_res = resid;
      best_iter = k;
    }
    if (resid <= tol * beta1) {
      converged = true;
      break;
    }
    if (beta_next <= 1e-300) break;  // Krylov subspace exhausted
    if (k - best_iter >= 100) break; // stalled

    v_old = std::move(v);
    v = std::move(z);
    rscale(v, 1.0 / beta_next);
    w_older = std::move(w_old);
    w_old = std::move(wk);
    c_prev2 = c_prev;
    s_prev2 = s_prev;
    c_prev = c_new;
    s_prev = s_new;
    beta_k = beta_next;
  }

  Field bx = apply_B(pt, x);
  double tr = 0.0;
  for (std::size_t i = 0; i < bx.size(); ++i) {
    const double d = b[i].real() - bx[i].real();
    tr += d * d;
  }
  st.iterations = iters;
  st.relative_residual = std::sqrt(tr * g.cell_volume()) / beta1;
  st.converged = converged && st.relative_residual <= 10.0 * tol;
  return x;
}

// Solve (P + 1 - N+) h = f for symmetrized physical f.
Field solve_core(const LinearizationPoint& pt, const Field& f,
                 const ContractionConfig& cfg, LinearSolveReport* report) {
  Field b = symmetrize_radial(pt.sqrt_weight(f, -1));
  MinresStats st;
  Field y = minres_radial(pt, b, cfg.inner_tol, cfg.inner_max_iters, st);
  if (report) {
    report->iterations = st.iterations;
    report->relative_residual = st.relative_residual;
    report->converged = st.converged;
  }
  if (!st.converged) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "linearized solve: relative residual %.3e after %d "
                  "iterations; outside invertibility regime",
                  st.relative_residual, st.iterations);
    throw solver_failure(buf);
  }
  return symmetrize_radial(pt.sqrt_weight(y, -1));
}

// Phi(r) with the r-independent pieces precomputed by the caller.
Field phi_core(const LinearizationPoint& pt, const Field& Q0_phys,
               const Field& forcing0, const Field& nprime0, const Field& r,
               const ContractionConfig& cfg, LinearSolveReport* report) {
  const GridSpec& g = pt.grid();
  Field upr(g, Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < upr.size(); ++i)
    upr[i] = Q0_phys[i].real() + r[i].real();
  Field np = nprime(upr, pt.kind());
  Field npr = pt.nonlinear_part(LinSign::plus, r);
  Field forcing(g, Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < forcing.size(); ++i)
    forcing[i] = forcing0[i].real() + np[i].real() - nprime0[i].real() -
                 npr[i].real();
  return solve_core(pt, symmetrize_radial(forcing), cfg, report);
}

// (-Lap - P) applied through the table difference xi2 - p.
Field perturbation_forcing(const Field& Q0_phys, const ProblemTables& t) {
  std::vector<double> diff(t.p.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = t.xi2[i] - t.p[i];
  return symmetrize_radial(apply_multiplier_table(Q0_phys, diff, true));
}

// ||(P+1)u - N'(u)||_{H^-1}, absolute, plain Sobolev weight.
double stationary_residual(const Field& u, const LinearizationPoint& pt) {
  const ProblemTables& t = pt.tables();
  Field uh = ensure_space(u, Space::fourier);
  Field nh = ensure_space(nprime(u, pt.kind()), Space::fourier);
  double acc = 0.0;
  for (std::size_t i = 0; i < uh.size(); ++i)
    acc += std::norm(t.one_plus_p[i] * uh[i] - nh[i]) / t.one_plus_xi2[i];
  return std::sqrt(acc * u.grid().fourier_weight());
}

ContractionResult contraction_run(const Field& Q0,
                                  const DispersionSymbol& symbol,
                                  const NonlinearityKind& kind,
                                  const ContractionConfig& cfg,
                                  const Field* r_init) {
  validate_config(cfg);
  require_real(Q0, "contraction: Q0");
  Field Q0_phys = ensure_space(Q0, Space::physical);
  {
    Field sym = symmetrize_radial(Q0_phys);
    if (radial_defect(Q0_phys, sym) > 1e-8)
      throw std::invalid_argument(
          "contraction: Q0 must be radial; center and symmetrize it first");
  }

  LinearizationPoint pt(Q0_phys, symbol, kind);
  const double base_res =
      LinearizationPoint(Q0_phys, DispersionSymbol::laplacian(), kind)
          .pde_residual();
  if (!(base_res < 1e-6)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "contraction: Q0 does not solve the base problem "
                  "(relative residual %.3e)",
                  base_res);
    throw std::invalid_argument(buf);
  }

  double beta0 = cfg.beta0;
  if (!(beta0 > 0.0)) {
    SpectrumReport rep =
        beta_estimate(LinSign::plus, Q0_phys, DispersionSymbol::laplacian(),
                      kind, Q0.grid().dim + 4);
    if (!rep.non_degenerate)
      throw solver_failure(
          "contraction: automatic beta0 measurement failed; pass beta0 in "
          "the config");
    beta0 = rep.beta;
  }

  ContractionResult out;
  out.beta0 = beta0;
  out.delta_eps = delta_epsilon(symbol, Q0_phys, beta0);
  out.factors_bounded = true;
  out.geometric_decay = true;

  const ProblemTables& t = pt.tables();
  const Field forcing0 = perturbation_forcing(Q0_phys, t);
  const Field nprime0 = nprime(Q0_phys, kind);

  Field r = zeros(Q0.grid());
  bool started_at_zero = true;
  if (r_init) {
    require_real(*r_init, "contraction: r_init");
    if (r_init->grid() != Q0.grid())
      throw std::invalid_argument("contraction: r_init grid mismatch");
    r = require_radial(*r_init, "contraction: r_init");
    started_at_zero = rnorm(r) == 0.0;
  }

  double prev_update = -1.0, first_update = -1.0;
  int exceed_run = 0, iter = 0;
  bool fp_converged = false;
  for (iter = 1; iter <= cfg.max_outer; ++iter) {
    Field rn = phi_core(pt, Q0_phys, forcing0, nprime0, r, cfg, nullptr);
    const double update = hp_distance(rn, r, t);
    const double factor = prev_update > 0.0 ? update / prev_update : 0.0;
    if (cfg.log_iterations) out.log.push_back({iter, update, factor});
    if (iter == 1) first_update = update;
    if (prev_update > 0.0) {
      if (factor > 1.0) {
        out.factors_bounded = false;
        ++exceed_run;
      } else {
        exceed_run = 0;
      }
      if (prev_update <= out.delta_eps && factor > 0.9)
        out.geometric_decay = false;
      if (exceed_run >= 5)
        throw solver_failure(
            "contraction diverged: update factor above 1 for five "
            "consecutive iterations; epsilon too large for this base "
            "solution");
    }
    r = std::move(rn);
    prev_update = update;
    if (update < cfg.fixed_point_tol) {
      fp_converged = true;
      break;
    }
  }

  out.correction = r;
  Field u(Q0.grid(), Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < u.size(); ++i)
    u[i] = Q0_phys[i].real() + r[i].real();
  out.u = std::move(u);
  out.correction_norm = norm_weighted(out.correction, t.one_plus_p);
  out.pde_residual = stationary_residual(out.u, pt);
  out.pde_check = out.pde_residual < 10.0 * cfg.fixed_point_tol;
  out.within_delta = out.correction_norm <= out.delta_eps;
  out.iterations = fp_converged ? iter : cfg.max_outer;
  if (fp_converged && iter == 1 && first_update == 0.0 && started_at_zero) {
    out.iterations = 0;
    out.message = "perturbation vanishes on this grid; base solution returned";
  }
  out.converged = fp_converged && out.pde_check;
  if (!fp_converged) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "did not reach the update tolerance in %d iterations "
                  "(last update %.3e)",
                  cfg.max_outer, prev_update);
    out.message = buf;
  } else if (!out.pde_check) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "fixed point reached but the stationary residual %.3e "
                  "exceeds 10x tolerance; Q0 is too loose",
                  out.pde_residual);
    out.message = buf;
  }
  return out;
}

} // namespace

double delta_epsilon(const DispersionSymbol& symbol, const Field& Q0,
                     double beta0) {
  if (!(beta0 > 0.0))
    throw std::invalid_argument("delta_epsilon: beta0 must be positive");
  require_real(Q0, "delta_epsilon: Q0");
  Field Q0_sym = require_radial(Q0, "delta_epsilon: Q0");
  auto t = build_tables(Q0.grid(), symbol);
  for (double w : t->one_plus_p)
    if (!(w > 0.0))
      throw std::invalid_argument(
          "delta_epsilon: symbol is not elliptic on this grid (1 + p <= 0)");
  std::vector<double> diff(t->p.size());
  for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = t->xi2[i] - t->p[i];
  Field f = apply_multiplier_table(Q0_sym, diff, true);
  return (4.0 / beta0) * norm_weighted(f, t->inv_one_plus_p);
}

Field solve_linearized_radial(const Field& f, const Field& Q0,
                              const DispersionSymbol& symbol,
                              const NonlinearityKind& kind,
                              const ContractionConfig& cfg,
                              LinearSolveReport* report) {
  validate_config(cfg);
  require_real(f, "linearized solve: right-hand side");
  require_real(Q0, "linearized solve: Q0");
  if (f.grid() != Q0.grid())
    throw std::invalid_argument("linearized solve: grid mismatch");
  Field f_sym = require_radial(f, "linearized solve: right-hand side");
  Field Q0_sym = require_radial(Q0, "linearized solve: Q0");
  LinearizationPoint pt(Q0_sym, symbol, kind);
  return solve_core(pt, f_sym, cfg, report);
}

Field phi(const Field& r, const Field& Q0, const DispersionSymbol& symbol,
          const NonlinearityKind& kind, const ContractionConfig& cfg) {
  validate_config(cfg);
  require_real(r, "phi: r");
  require_real(Q0, "phi: Q0");
  if (r.grid() != Q0.grid())
    throw std::invalid_argument("phi: grid mismatch");
  Field r_sym = require_radial(r, "phi: r");
  Field Q0_sym = require_radial(Q0, "phi: Q0");
  LinearizationPoint pt(Q0_sym, symbol, kind);
  const Field forcing0 = perturbation_forcing(Q0_sym, pt.tables());
  const Field nprime0 = nprime(Q0_sym, kind);
  return phi_core(pt, Q0_sym, forcing0, nprime0, r_sym, cfg, nullptr);
}

ContractionResult contraction_solve(const Field& Q0,
                                    const DispersionSymbol& symbol,
                                    const NonlinearityKind& kind,
                                    const ContractionConfig& cfg) {
  return contraction_run(Q0, symbol, kind, cfg, nullptr);
}

ContractionResult contraction_solve(const Field& Q0,
                                    const DispersionSymbol& symbol,
                                    const NonlinearityKind& kind,
                                    const ContractionConfig& cfg,
                                    const Field& r_init) {
  return contraction_run(Q0, symbol, kind, cfg, &r_init);
}

} // namespace honls
