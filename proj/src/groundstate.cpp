#include "honls/groundstate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <random>
#include <thread>

namespace honls {

namespace {

Field field_lincomb(const Field& a, double ca, const Field& b, double cb) {
  Field out = a;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = ca * a[i] + cb * b[i];
  out.set_reality(a.reality() == Reality::real_valued &&
                          b.reality() == Reality::real_valued
                      ? Reality::real_valued
                      : Reality::complex_valued);
  return out;
}

double hp_norm2_hat(const Field& hat, const ProblemTables& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < hat.size(); ++i)
    acc += t.one_plus_p[i] * std::norm(hat[i]);
  return acc * hat.grid().fourier_weight();
}

// ||g||_{H^-1} of g given in Fourier space
double hm1_norm_hat(const Field& ghat, const ProblemTables& t) {
  double acc = 0.0;
  for (std::size_t i = 0; i < ghat.size(); ++i)
    acc += std::norm(ghat[i]) / t.one_plus_xi2[i];
  return std::sqrt(std::max(0.0, acc * ghat.grid().fourier_weight()));
}

struct DealiasMask {
  bool enabled = false;
  std::vector<bool> keep;
};

DealiasMask build_mask(const GridSpec& g, int p, bool enabled, double fraction) {
  DealiasMask m;
  m.enabled = enabled;
  if (!enabled) return m;
  double f = fraction > 0.0 ? fraction : 2.0 / (p + 1);
  const double kmax = f * (g.n / 2);
  m.keep.assign(g.size(), true);
  int ix[3];
  for (std::size_t i = 0; i < g.size(); ++i) {
    decode_index(g, i, ix);
    for (int a = 0; a < g.dim; ++a)
      if (std::abs(g.signed_index(ix[a])) >= kmax) {
        m.keep[i] = false;
        break;
      }
  }
  return m;
}

struct Workspace {
  const GroundStateProblem& problem;
  const ProblemTables& t;
  const DealiasMask& mask;
  int p; // nonlinearity order

  struct State {
    Field hat;  // fourier
    Field phys; // physical
    double hp2 = 0.0;
    double nval = 0.0;
    double act = 0.0;
  };

  // build an admissible state from a Fourier-space candidate: dealias,
  // project to the Nehari manifold, evaluate the action
  bool admissible_state(Field vhat, State& out) const {
    if (mask.enabled)
      for (std::size_t i = 0; i < vhat.size(); ++i)
        if (!mask.keep[i]) vhat[i] = 0.0;
    Field vphys = transform(vhat, Space::physical);
    const double nv = potential_energy(vphys, problem.kind);
    if (!(nv > 0.0) || !std::isfinite(nv)) return false;
    const double hp2 = hp_norm2_hat(vhat, t);
    if (!(hp2 > 0.0)) return false;
    const double tscale = std::pow(hp2 / ((p + 1.0) * nv), 1.0 / (p - 1.0));
    if (!std::isfinite(tscale) || tscale <= 0.0) return false;
    for (auto& z : vhat.values()) z *= tscale;
    for (auto& z : vphys.values()) z *= tscale;
    out.hat = std::move(vhat);
    out.phys = std::move(vphys);
    out.hp2 = hp2 * tscale * tscale;
    out.nval = nv * std::pow(tscale, p + 1.0);
    out.act = 0.5 * out.hp2 - out.nval;
    return true;
  }
};

Field gaussian_init(const GridSpec& g, double sigma, double amp) {
  Field f(g, Space::physical, Reality::real_valued);
  for_each_point(g, [&](std::size_t i, const double* x) {
    double r2 = 0.0;
    for (int a = 0; a < g.dim; ++a) r2 += x[a] * x[a];
    f[i] = amp * std::exp(-r2 / (2.0 * sigma * sigma));
  });
  return f;
}

struct DescentOutcome {
  Workspace::State state;
  int iterations = 0;
  bool converged = false;
  double gradient_residual = 0.0;
  std::string message;
  std::vector<IterationRow> log;
};

DescentOutcome descend(const Workspace& ws, const Field& init,
                       const SolverConfig& cfg) {
  DescentOutcome out;
  Workspace::State cur;
  {
    Field ihat = ensure_space(init, Space::fourier);
    if (!ws.admissible_state(std::move(ihat), cur))
      throw std::invalid_argument(
          "minimize: initial guess has non-positive potential energy");
  }

  const ProblemTables& t = ws.t;
  const GridSpec& g = ws.problem.grid;
  const double wxi = g.fourier_weight();

  double tau = 0.5;
  Field prev_hat, prev_grad;
  bool have_prev = false;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    // gradient and residual from N'(u) at the current point
    Field np = nprime(cur.phys, ws.problem.kind);
    Field nphat = transform(np, Space::fourier);
    Field grad = cur.hat; // u - (P+1)^{-1} N'(u) in Fourier space
    double res2 = 0.0;
    for (std::size_t i = 0; i < grad.size(); ++i) {
      const std::complex<double> r = t.one_plus_p[i] * cur.hat[i] - nphat[i];
      res2 += std::norm(r) / t.one_plus_xi2[i];
      grad[i] = cur.hat[i] - nphat[i] * t.inv_one_plus_p[i];
    }
    const double residual = std::sqrt(std::max(0.0, res2 * wxi));
    out.gradient_residual = residual;
    if (cfg.log_iterations)
      out.log.push_back({iter, cur.act, residual, tau});
    if (residual < cfg.grad_tol) {
      out.converged = true;
      out.iterations = iter;
      out.state = std::move(cur);
      return out;
    }

    // BB step from the previous accepted move
    if (have_prev) {
      double snum = 0.0, sden = 0.0;
      for (std::size_t i = 0; i < grad.size(); ++i) {
        const std::complex<double> du = cur.hat[i] - prev_hat[i];
        const std::complex<double> dg = grad[i] - prev_grad[i];
        snum += t.one_plus_p[i] * std::norm(du);
        sden += t.one_plus_p[i] * (du * std::conj(dg)).real();
      }
      if (sden > 1e-300) tau = std::clamp(snum / sden, 1e-4, 10.0);
    }
    prev_hat = cur.hat;
    prev_grad = grad;
    have_prev = true;

    bool accepted = false;
    for (int bt = 0; bt < 60; ++bt) {
      Workspace::State cand;
      if (ws.admissible_state(field_lincomb(cur.hat, 1.0, grad, -tau), cand)) {
        if (cand.act <= cur.act + 1e-12 * std::max(1.0, std::abs(cur.act))) {
          cur = std::move(cand);
          accepted = true;
          break;
        }
      }
      tau *= 0.5;
      if (tau < 1e-14) break;
    }
    if (!accepted) {
      out.iterations = iter + 1;
      out.state = std::move(cur);
      out.message = "step-size collapse before reaching the gradient tolerance";
      return out;
    }
  }
  out.iterations = cfg.max_iters;
  out.state = std::move(cur);
  out.message = "iteration limit reached";
  return out;
}

} // namespace

std::shared_ptr<const ProblemTables> build_tables(const GridSpec& g,
                                                  const DispersionSymbol& sym) {
  auto t = std::make_shared<ProblemTables>();
  const std::size_t sz = g.size();
  t->p.resize(sz);
  t->one_plus_p.resize(sz);
  t->inv_one_plus_p.resize(sz);
  t->inv_sqrt_one_plus_p.resize(sz);
  t->xi2.resize(sz);
  t->one_plus_xi2.resize(sz);
  for_each_mode(g, [&](std::size_t i, const double* xi) {
    double xi2 = 0.0;
    for (int a = 0; a < g.dim; ++a) xi2 += xi[a] * xi[a];
    const double p = sym.eval(xi, g.dim);
    t->p[i] = p;
    t->one_plus_p[i] = 1.0 + p;
    t->inv_one_plus_p[i] = 1.0 / (1.0 + p);
    t->inv_sqrt_one_plus_p[i] = 1.0 / std::sqrt(1.0 + p);
    t->xi2[i] = xi2;
    t->one_plus_xi2[i] = 1.0 + xi2;
  });
  return t;
}

GroundStateProblem::GroundStateProblem(const GridSpec& g, const DispersionSymbol& s,
                                       const NonlinearityKind& k)
    : grid(g), symbol(s), kind(k) {
  kind.require_admissible(g.dim);
  EllipticityReport rep = ellipticity_gamma(s, g);
  if (!rep.pass) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "problem rejected: symbol fails ellipticity (gamma=%.6g%s)",
                  rep.gamma, rep.tail_negative ? ", negative leading order" : "");
    throw std::invalid_argument(buf);
  }
  tables_ = build_tables(g, s);
}

double action(const Field& u, const GroundStateProblem& problem) {
  Field hat = ensure_space(u, Space::fourier);
  return 0.5 * hp_norm2_hat(hat, problem.tables()) -
         potential_energy(u, problem.kind);
}

double nehari_scale(const Field& u, const GroundStateProblem& problem) {
  const double nv = potential_energy(u, problem.kind);
  if (!(nv > 0.0))
    throw std::invalid_argument("nehari_scale: potential energy must be positive");
  Field hat = ensure_space(u, Space::fourier);
  const double hp2 = hp_norm2_hat(hat, problem.tables());
  const int p = problem.kind.order_p();
  return std::pow(hp2 / ((p + 1.0) * nv), 1.0 / (p - 1.0));
}

Field sobolev_gradient(const Field& u, const GroundStateProblem& problem) {
  const ProblemTables& t = problem.tables();
  Field hat = ensure_space(u, Space::fourier);
  Field nphat = ensure_space(nprime(u, problem.kind), Space::fourier);
  for (std::size_t i = 0; i < hat.size(); ++i)
    hat[i] -= nphat[i] * t.inv_one_plus_p[i];
  hat.set_reality(u.reality());
  if (u.space() == Space::physical) return transform(hat, Space::physical);
  return hat;
}

double hp_distance(const Field& u, const Field& v, const ProblemTables& t) {
  Field uh = ensure_space(u, Space::fourier);
  Field vh = ensure_space(v, Space::fourier);
  double acc = 0.0;
  for (std::size_t i = 0; i < uh.size(); ++i)
    acc += t.one_plus_p[i] * std::norm(uh[i] - vh[i]);
  return std::sqrt(std::max(0.0, acc * u.grid().fourier_weight()));
}

GroundStateResult minimize(const GroundStateProblem& problem,
                           const std::optional<Field>& init,
                           const SolverConfig& cfg) {
  const ProblemTables& t = problem.tables();
  const int p = problem.kind.order_p();
  DealiasMask mask =
      build_mask(problem.grid, p, cfg.dealias, cfg.dealias_fraction);
  Workspace ws{problem, t, mask, p};

  std::vector<DescentOutcome> outcomes;
  int starts_used = 1;
  if (init.has_value()) {
    if (init->grid() != problem.grid)
      throw std::invalid_argument("minimize: init grid mismatch");
    outcomes.push_back(descend(ws, *init, cfg));
  } else {
    const int nstart = std::max(1, cfg.multistart);
    starts_used = nstart;
    outcomes.resize(nstart);
    auto run_start = [&](int s) {
      std::mt19937_64 eng(cfg.seed ^ (0x9e3779b97f4a7c15ull + 2654435761u * s));
      const double u01 = static_cast<double>(eng() >> 11) * 0x1.0p-53;
      const double sigma = 0.9 + 0.55 * s + 0.2 * u01;
      outcomes[s] = descend(ws, gaussian_init(problem.grid, sigma, 1.5), cfg);
    };
    int workers = std::max(1, cfg.workers);
    if (const char* env = std::getenv("HONLS_WORKERS")) {
      const int w = std::atoi(env);
      if (w > 0) workers = w;
    }
    if (workers > 1 && nstart > 1) {
      std::vector<std::thread> pool;
      std::atomic<int> next{0};
      const int nthreads = std::min(workers, nstart);
      for (int w = 0; w < nthreads; ++w)
        pool.emplace_back([&] {
          for (int s = next.fetch_add(1); s < nstart; s = next.fetch_add(1))
            run_start(s);
        });
      for (auto& th : pool) th.join();
    } else {
      for (int s = 0; s < nstart; ++s) run_start(s);
    }
  }

  // lowest action among converged starts; fall back to the best attempt
  int best = -1;
  for (int i = 0; i < static_cast<int>(outcomes.size()); ++i) {
    if (!outcomes[i].converged) continue;
    if (best < 0 || outcomes[i].state.act < outcomes[best].state.act) best = i;
  }
  bool any_converged = best >= 0;
  if (best < 0) {
    best = 0;
    for (int i = 1; i < static_cast<int>(outcomes.size()); ++i)
      if (outcomes[i].gradient_residual < outcomes[best].gradient_residual)
        best = i;
  }
  DescentOutcome& sel = outcomes[best];

  // gauge fixing: global phase to the real subspace, positive maximum,
  // maximum moved to the origin grid point
  Field q = std::move(sel.state.phys);
  {
    std::complex<double> ssum{0.0, 0.0};
    for (const auto& z : q.values()) ssum += z * z;
    if (std::abs(ssum) > 0.0) {
      const std::complex<double> rot = std::polar(1.0, -0.5 * std::arg(ssum));
      for (auto& z : q.values()) z *= rot;
    }
    for (auto& z : q.values()) z = z.real();
    q.set_reality(Reality::real_valued);

    std::size_t imax = 0;
    double vmax = 0.0;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double a = std::abs(q[i].real());
      if (a > vmax) {
        vmax = a;
        imax = i;
      }
    }
    if (q[imax].real() < 0.0)
      for (auto& z : q.values()) z = -z;
    int ix[3] = {0, 0, 0};
    decode_index(problem.grid, imax, ix);
    bool nonzero = false;
    for (int a = 0; a < problem.grid.dim; ++a) nonzero |= ix[a] != 0;
    if (nonzero) {
      int cells[3] = {-ix[0], -ix[1], -ix[2]};
      q = cyclic_shift(q, cells);
    }
  }

  // re-project and recompute diagnostics on the gauge-fixed field
  GroundStateResult result;
  {
    Field qhat = transform(q, Space::fourier);
    const double nv = potential_energy(q, problem.kind);
    const double hp2 = hp_norm2_hat(qhat, t);
    if (nv > 0.0 && hp2 > 0.0) {
      const double ts = std::pow(hp2 / ((p + 1.0) * nv), 1.0 / (p - 1.0));
      for (auto& z : q.values()) z *= ts;
      for (auto& z : qhat.values()) z *= ts;
    }
    Field np = nprime(q, problem.kind);
    Field nphat = transform(np, Space::fourier);
    double res2 = 0.0, hp2f = 0.0, h12 = 0.0;
    for (std::size_t i = 0; i < qhat.size(); ++i) {
      const std::complex<double> r = t.one_plus_p[i] * qhat[i] - nphat[i];
      res2 += std::norm(r) / t.one_plus_xi2[i];
      hp2f += t.one_plus_p[i] * std::norm(qhat[i]);
      h12 += t.one_plus_xi2[i] * std::norm(qhat[i]);
    }
    const double wxi = problem.grid.fourier_weight();
    const double nvf = potential_energy(q, problem.kind);
    result.gradient_residual = std::sqrt(std::max(0.0, res2 * wxi));
    result.action = 0.5 * hp2f * wxi - nvf;
    result.nehari_residual =
        std::abs(hp2f * wxi - (p + 1.0) * nvf) / (hp2f * wxi);
    result.pde_residual_rel =
        result.gradient_residual / std::sqrt(std::max(1e-300, h12 * wxi));
    result.tail_fraction = spectral_tail_fraction(qhat, 1.0);
    result.under_resolved = result.tail_fraction > cfg.tail_threshold;

    double peak = 0.0, boundary = 0.0;
    int ix[3];
    const int nyq = problem.grid.n / 2;
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double a = std::abs(q[i].real());
      peak = std::max(peak, a);
      decode_index(problem.grid, i, ix);
      for (int ax = 0; ax < problem.grid.dim; ++ax)
        if (ix[ax] == nyq) {
          boundary = std::max(boundary, a);
          break;
        }
    }
    result.boundary_amplitude = peak > 0.0 ? boundary / peak : 0.0;
  }

  result.Q = std::move(q);
  result.iterations = sel.iterations;
  result.converged = any_converged && result.gradient_residual < 10.0 * cfg.grad_tol;
  result.starts_used = starts_used;
  result.message = sel.message;
  result.log = std::move(sel.log);
  return result;
}

AlignmentResult align(const Field& u, const Field& reference,
                      const DispersionSymbol& metric_symbol) {
  if (u.grid() != reference.grid())
    throw std::invalid_argument("align: grid mismatch");
  const GridSpec& g = u.grid();
  auto tables = build_tables(g, metric_symbol);
  const ProblemTables& t = *tables;

  Field uh = ensure_space(u, Space::fourier);
  Field rh = ensure_space(reference, Space::fourier);
  const double wxi = g.fourier_weight();

  // h(xi) = (1+p) uhat conj(rhat) wt; G(a) = sum h e^{-i xi.a} is the
  // correlation <shift(u,a), ref>_{H1_P} before the phase factor
  Field h(g, Space::fourier, Reality::complex_valued);
  for (std::size_t i = 0; i < h.size(); ++i)
    h[i] = t.one_plus_p[i] * uh[i] * std::conj(rh[i]) * wxi;

  const double unorm = std::sqrt(hp_norm2_hat(uh, t));
  const double rnorm = std::sqrt(hp_norm2_hat(rh, t));

  // coarse search over all integer-cell shifts with one DFT
  Field corr = h;
  dft_inplace(g, corr.data(), -1);
  std::size_t ibest = 0;
  double cbest = -1.0;
  for (std::size_t i = 0; i < corr.size(); ++i) {
    const double c = std::abs(corr[i]);
    if (c > cbest) {
      cbest = c;
      ibest = i;
    }
  }
  int ix[3] = {0, 0, 0};
  decode_index(g, ibest, ix);
  double a[3] = {0.0, 0.0, 0.0};
  for (int ax = 0; ax < g.dim; ++ax) a[ax] = g.coord(ix[ax]);

  // Newton refinement of |G(a)|^2 with per-axis phase tables
  const int d = g.dim;
  std::vector<std::complex<double>> ph[3];
  auto eval_G = [&](const double* av, std::complex<double>& G,
                    std::complex<double>* Gi, std::complex<double>* Gij) {
    for (int ax = 0; ax < d; ++ax) {
      ph[ax].resize(g.n);
      for (int i = 0; i < g.n; ++i)
        ph[ax][i] = std::polar(1.0, -g.xi(i) * av[ax]);
    }
    G = 0.0;
    for (int q = 0; q < 9; ++q) {
      if (Gi) Gi[q % 3] = 0.0;
      if (Gij) Gij[q] = 0.0;
    }
    int id[3];
    for_each_mode(g, [&](std::size_t i, const double* xi) {
      decode_index(g, i, id);
      std::complex<double> e{1.0, 0.0};
      for (int ax = 0; ax < d; ++ax) e *= ph[ax][id[ax]];
      const std::complex<double> he = h[i] * e;
      G += he;
      if (Gi)
        for (int ax = 0; ax < d; ++ax)
          Gi[ax] += std::complex<double>(0.0, -xi[ax]) * he;
      if (Gij)
        for (int ax = 0; ax < d; ++ax)
          for (int bx = 0; bx < d; ++bx)
            Gij[3 * ax + bx] += std::complex<double>(-xi[ax] * xi[bx], 0.0) * he;
    });
  };

  std::complex<double> G, Gi[3], Gij[9];
  for (int it = 0; it < 40; ++it) {
    eval_G(a, G, Gi, Gij);
    double grad[3] = {0, 0, 0}, hess[9] = {0, 0, 0, 0, 0, 0, 0, 0, 0};
    for (int ax = 0; ax < d; ++ax)
      grad[ax] = 2.0 * (std::conj(G) * Gi[ax]).real();
    for (int ax = 0; ax < d; ++ax)
      for (int bx = 0; bx < d; ++bx)
        hess[3 * ax + bx] = 2.0 * ((std::conj(Gi[ax]) * Gi[bx]).real() +
                                   (std::conj(G) * Gij[3 * ax + bx]).real());
    double gnorm = 0.0;
    for (int ax = 0; ax < d; ++ax) gnorm = std::max(gnorm, std::abs(grad[ax]));
    if (gnorm < 1e-13 * std::max(1.0, std::norm(G))) break;
    // solve hess * delta = -grad (d x d, Gaussian elimination)
    double m[9], rhs[3];
    for (int q = 0; q < 9; ++q) m[q] = hess[q];
    for (int ax = 0; ax < d; ++ax) rhs[ax] = -grad[ax];
    bool ok = true;
    for (int col = 0; col < d && ok; ++col) {
      int piv = col;
      for (int r = col + 1; r < d; ++r)
        if (std::abs(m[3 * r + col]) > std::abs(m[3 * piv + col])) piv = r;
      if (std::abs(m[3 * piv + col]) < 1e-300) {
        ok = false;
        break;
      }
      if (piv != col) {
        for (int cc = 0; cc < d; ++cc) std::swap(m[3 * piv + cc], m[3 * col + cc]);
        std::swap(rhs[piv], rhs[col]);
      }
      for (int r = col + 1; r < d; ++r) {
        const double f = m[3 * r + col] / m[3 * col + col];
        for (int cc = col; cc < d; ++cc) m[3 * r + cc] -= f * m[3 * col + cc];
        rhs[r] -= f * rhs[col];
      }
    }
    if (!ok) break;
    double delta[3] = {0, 0, 0};
    for (int r = d - 1; r >= 0; --r) {
      double s = rhs[r];
      for (int cc = r + 1; cc < d; ++cc) s -= m[3 * r + cc] * delta[cc];
      delta[r] = s / m[3 * r + r];
    }
    const double clip = 0.5 * g.dx();
    double step = 0.0;
    for (int ax = 0; ax < d; ++ax) step = std::max(step, std::abs(delta[ax]));
    if (step > clip)
      for (int ax = 0; ax < d; ++ax) delta[ax] *= clip / step;
    for (int ax = 0; ax < d; ++ax) a[ax] += delta[ax];
    if (step < 1e-15) break;
  }
  eval_G(a, G, nullptr, nullptr);

  if (!(std::abs(G) > 1e-10 * unorm * rnorm))
    throw std::invalid_argument(
        "align: inner product with the reference vanishes; alignment undefined");

  AlignmentResult res;
  res.theta = -std::arg(G);
  for (int ax = 0; ax < 3; ++ax) res.shift[ax] = ax < d ? a[ax] : 0.0;
  res.aligned = shift_and_phase(u, a, res.theta);
  Field ah = ensure_space(res.aligned, Space::fourier);
  double acc = 0.0;
  for (std::size_t i = 0; i < ah.size(); ++i)
    acc += t.one_plus_p[i] * std::norm(ah[i] - rh[i]);
  res.residual = std::sqrt(std::max(0.0, acc * wxi));
  return res;
}

} // namespace honls
