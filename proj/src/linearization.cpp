#include "honls/linearization.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

namespace honls {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

Field convolve_kernel(const Field& f, const HartreeKernel& ker) {
  Field hat = ensure_space(f, Space::fourier);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= ker.khat[i];
  hat.set_reality(f.reality());
  return transform(hat, Space::physical);
}

void strip_imag(Field& f) {
  for (auto& z : f.values()) z = z.real();
  f.set_reality(Reality::real_valued);
}

double l2dot(const Field& a, const Field& b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i].real() * b[i].real();
  return acc * a.grid().cell_volume();
}

double l2norm(const Field& a) { return std::sqrt(std::max(0.0, l2dot(a, a))); }

void axpy(Field& y, double c, const Field& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += c * x[i];
}

void scal(Field& y, double c) {
  for (auto& z : y.values()) z *= c;
}

// Cyclic Jacobi eigensolve of the symmetric m x m matrix a (row-major,
// destroyed). Eigenvalues land in eig descending; v holds the matching
// eigenvectors in its columns (v[i*m+j] = component i of eigenvector j).
void jacobi_eigen(std::vector<double>& a, int m, std::vector<double>& v,
                  std::vector<double>& eig) {
  const std::size_t mm = static_cast<std::size_t>(m);
  v.assign(mm * mm, 0.0);
  for (int i = 0; i < m; ++i) v[static_cast<std::size_t>(i) * mm + i] = 1.0;
  double fro2 = 0.0;
  for (std::size_t i = 0; i < mm * mm; ++i) fro2 += a[i] * a[i];
  const double stop = 1e-30 * std::max(fro2, 1e-300);
  auto off2 = [&]() {
    double s = 0.0;
    for (int i = 0; i < m; ++i)
      for (int j = i + 1; j < m; ++j) {
        const double x = a[static_cast<std::size_t>(i) * mm + j];
        s += x * x;
      }
    return s;
  };
  for (int sweep = 0; sweep < 60 && off2() > stop; ++sweep) {
    for (int p = 0; p < m - 1; ++p)
      for (int q = p + 1; q < m; ++q) {
        const double apq = a[static_cast<std::size_t>(p) * mm + q];
        if (std::abs(apq) < 1e-300) continue;
        const double app = a[static_cast<std::size_t>(p) * mm + p];
        const double aqq = a[static_cast<std::size_t>(q) * mm + q];
        const double tau = (aqq - app) / (2.0 * apq);
        const double t =
            (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int i = 0; i < m; ++i) { // A <- A J
          const double aip = a[static_cast<std::size_t>(i) * mm + p];
          const double aiq = a[static_cast<std::size_t>(i) * mm + q];
          a[static_cast<std::size_t>(i) * mm + p] = c * aip - s * aiq;
          a[static_cast<std::size_t>(i) * mm + q] = s * aip + c * aiq;
        }
        for (int i = 0; i < m; ++i) { // A <- J^T A
          const double api = a[static_cast<std::size_t>(p) * mm + i];
          const double aqi = a[static_cast<std::size_t>(q) * mm + i];
          a[static_cast<std::size_t>(p) * mm + i] = c * api - s * aqi;
          a[static_cast<std::size_t>(q) * mm + i] = s * api + c * aqi;
        }
        for (int i = 0; i < m; ++i) { // V <- V J
          const double vip = v[static_cast<std::size_t>(i) * mm + p];
          const double viq = v[static_cast<std::size_t>(i) * mm + q];
          v[static_cast<std::size_t>(i) * mm + p] = c * vip - s * viq;
          v[static_cast<std::size_t>(i) * mm + q] = s * vip + c * viq;
        }
      }
  }
  eig.resize(mm);
  for (int i = 0; i < m; ++i) eig[i] = a[static_cast<std::size_t>(i) * mm + i];
  std::vector<int> ord(mm);
  for (int i = 0; i < m; ++i) ord[i] = i;
  std::sort(ord.begin(), ord.end(), [&](int x, int y) { return eig[x] > eig[y]; });
  std::vector<double> e2(mm), v2(mm * mm);
  for (int j = 0; j < m; ++j) {
    e2[j] = eig[ord[j]];
    for (int i = 0; i < m; ++i)
      v2[static_cast<std::size_t>(i) * mm + j] =
          v[static_cast<std::size_t>(i) * mm + ord[j]];
  }
  eig = std::move(e2);
  v = std::move(v2);
}

struct EigenOutcome {
  std::vector<double> mu;
  std::vector<double> resid;
  double max_overlap = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Deflated block eigensolve for the largest eigenvalues of A^{sign} at the
// given point. The conjugation by (1+p)^{-1/2} inside A is the multiplier
// preconditioning of the unbounded linearization, so the bounded conjugate
// is iterated with plain residual directions: blocks of current iterates X,
// residuals W and previous-step directions P are combined by a Rayleigh-Ritz
// step each iteration; A-images of X and P are carried as linear
// combinations and recomputed periodically.
EigenOutcome lobpcg_top(const LinearizationPoint& pt, LinSign sign,
                        const std::vector<Field>& deflate, int n_eigs,
                        const EigensolveOptions& opt) {
  const GridSpec& g = pt.grid();
  const int bx = n_eigs + std::max(2, n_eigs / 4);
  if (static_cast<std::size_t>(bx) + deflate.size() + 1 >= g.size())
    throw std::invalid_argument("beta_estimate: n_eigs too large for this grid");

  auto apply = [&](const Field& x) {
    Field y = pt.sandwiched(sign, x);
    strip_imag(y);
    return y;
  };
  auto deflect = [&](Field& x) {
    for (const Field& z : deflate) axpy(x, -l2dot(z, x), z);
  };

  std::vector<Field> X, AX, P, AP;
  std::vector<double> mu(static_cast<std::size_t>(bx), 0.0);

  // seeded random initial block, deflated and orthonormalized
  std::uint64_t salt = 0;
  for (int jcol = 0; jcol < bx; ++jcol) {
    for (int attempt = 0; attempt < 20; ++attempt) {
      Field xcand =
          random_smooth_field(g, opt.seed + 1000003ull * (jcol + 1) + salt, 3.0);
      strip_imag(xcand);
      ++salt;
      deflect(xcand);
      for (int r = 0; r < 2; ++r)
        for (const Field& xj : X) axpy(xcand, -l2dot(xj, xcand), xj);
      const double nn = l2norm(xcand);
      if (nn > 1e-8) {
        scal(xcand, 1.0 / nn);
        X.push_back(std::move(xcand));
        break;
      }
    }
    if (static_cast<int>(X.size()) != jcol + 1)
      throw solver_failure("beta_estimate: could not build an initial block");
  }
  AX.reserve(X.size());
  for (const Field& x : X) AX.push_back(apply(x));

  // Rayleigh-Ritz over the columns of S with images AS; rotates the leading
  // bx pairs into (X, AX, mu) and builds the next P from the chosen
  // combinations' components beyond the first x_block columns of S
  // (coefficient-space orthonormalization, exact since S is orthonormal).
  auto ritz = [&](std::vector<Field>& S, std::vector<Field>& AS, int x_block,
                  bool build_p) {
    const int m = static_cast<int>(S.size());
    const std::size_t mm = static_cast<std::size_t>(m);
    std::vector<double> gram(mm * mm);
    for (int i = 0; i < m; ++i)
      for (int j = i; j < m; ++j) {
        const double v = 0.5 * (l2dot(S[i], AS[j]) + l2dot(S[j], AS[i]));
        gram[static_cast<std::size_t>(i) * mm + j] = v;
        gram[static_cast<std::size_t>(j) * mm + i] = v;
      }
    std::vector<double> vec, eig;
    jacobi_eigen(gram, m, vec, eig);
    const int nx = std::min(bx, m);
    std::vector<Field> Xn, AXn;
    Xn.reserve(nx);
    AXn.reserve(nx);
    for (int j = 0; j < nx; ++j) {
      Field xn(g, Space::physical, Reality::real_valued);
      Field axn(g, Space::physical, Reality::real_valued);
      for (int i = 0; i < m; ++i) {
        const double c = vec[static_cast<std::size_t>(i) * mm + j];
        if (c == 0.0) continue;
        axpy(xn, c, S[i]);
        axpy(axn, c, AS[i]);
      }
      Xn.push_back(std::move(xn));
      AXn.push_back(std::move(axn));
      mu[j] = eig[j];
    }
    std::vector<Field> Pn, APn;
    if (build_p && m > x_block) {
      // coefficients of the new Ritz vectors with the X-block rows zeroed
      std::vector<std::vector<double>> coef(nx, std::vector<double>(mm, 0.0));
      for (int j = 0; j < nx; ++j)
        for (int i = x_block; i < m; ++i)
          coef[j][i] = vec[static_cast<std::size_t>(i) * mm + j];
      // project out the full Ritz coefficients so the next P block is
      // orthogonal to the new X block
      for (int j = 0; j < nx; ++j)
        for (int jj = 0; jj < nx; ++jj) {
          double dot = 0.0;
          for (int i = 0; i < m; ++i)
            dot += vec[static_cast<std::size_t>(i) * mm + jj] * coef[j][i];
          for (int i = 0; i < m; ++i)
            coef[j][i] -= dot * vec[static_cast<std::size_t>(i) * mm + jj];
        }
      std::vector<std::vector<double>> kept;
      for (int j = 0; j < nx && static_cast<int>(kept.size()) < bx; ++j) {
        std::vector<double> cj = coef[j];
        for (const auto& kk : kept) {
          double dot = 0.0;
          for (int i = 0; i < m; ++i) dot += kk[i] * cj[i];
          for (int i = 0; i < m; ++i) cj[i] -= dot * kk[i];
        }
        double nn = 0.0;
        for (int i = 0; i < m; ++i) nn += cj[i] * cj[i];
        nn = std::sqrt(nn);
        if (nn < 1e-8) continue;
        for (int i = 0; i < m; ++i) cj[i] /= nn;
        kept.push_back(std::move(cj));
      }
      for (const auto& cj : kept) {
        Field pn(g, Space::physical, Reality::real_valued);
        Field apn(g, Space::physical, Reality::real_valued);
        for (int i = 0; i < m; ++i) {
          if (cj[i] == 0.0) continue;
          axpy(pn, cj[i], S[i]);
          axpy(apn, cj[i], AS[i]);
        }
        Pn.push_back(std::move(pn));
        APn.push_back(std::move(apn));
      }
    }
    X = std::move(Xn);
    AX = std::move(AXn);
    P = std::move(Pn);
    AP = std::move(APn);
  };

  ritz(X, AX, static_cast<int>(X.size()), false);

  EigenOutcome out;
  const auto tol_of = [&](double m_) { return opt.tol * std::max(1.0, std::abs(m_)); };
  int it = 0;
  for (; it < opt.max_iters; ++it) {
    // refresh A-images and deflation periodically to cap combination drift
    if (it > 0 && it % 25 == 0) {
      for (std::size_t j = 0; j < X.size(); ++j) {
        deflect(X[j]);
        for (int r = 0; r < 2; ++r)
          for (std::size_t i = 0; i < j; ++i)
            axpy(X[j], -l2dot(X[i], X[j]), X[i]);
        const double nn = l2norm(X[j]);
        if (nn > 0.0) scal(X[j], 1.0 / nn);
      }
      for (std::size_t j = 0; j < X.size(); ++j) AX[j] = apply(X[j]);
      P.clear();
      AP.clear();
      ritz(X, AX, static_cast<int>(X.size()), false);
    }

    std::vector<Field> R;
    R.reserve(X.size());
    bool done = true;
    for (std::size_t j = 0; j < X.size(); ++j) {
      Field r = AX[j];
      axpy(r, -mu[j], X[j]);
      if (static_cast<int>(j) < n_eigs && l2norm(r) > tol_of(mu[j])) done = false;
      R.push_back(std::move(r));
    }
    if (done) {
      out.converged = true;
      break;
    }

    std::vector<Field> W;
    for (std::size_t j = 0; j < R.size(); ++j) {
      Field w = R[j];
      deflect(w);
      const double pre = l2norm(w);
      if (!(pre > 0.0)) continue;
      for (int r = 0; r < 2; ++r) {
        for (const Field& xj : X) axpy(w, -l2dot(xj, w), xj);
        for (const Field& pj : P) axpy(w, -l2dot(pj, w), pj);
        for (const Field& wj : W) axpy(w, -l2dot(wj, w), wj);
      }
      const double post = l2norm(w);
      if (post < 1e-8 * pre) continue;
      scal(w, 1.0 / post);
      W.push_back(std::move(w));
    }
    if (W.empty()) {
      // residual directions exhausted by projection; inject a fresh vector
      Field w = random_smooth_field(g, opt.seed + 7777777ull + salt, 3.0);
      ++salt;
      strip_imag(w);
      deflect(w);
      for (int r = 0; r < 2; ++r) {
        for (const Field& xj : X) axpy(w, -l2dot(xj, w), xj);
        for (const Field& pj : P) axpy(w, -l2dot(pj, w), pj);
      }
      const double nn = l2norm(w);
      if (nn > 1e-10) {
        scal(w, 1.0 / nn);
        W.push_back(std::move(w));
      } else {
        out.converged = true; // subspace exhausted: nothing left to add
        break;
      }
    }

    std::vector<Field> S = std::move(X);
    std::vector<Field> AS = std::move(AX);
    for (auto& w : W) {
      S.push_back(std::move(w));
      AS.push_back(apply(S.back()));
    }
    for (std::size_t j = 0; j < P.size(); ++j) {
      S.push_back(std::move(P[j]));
      AS.push_back(std::move(AP[j]));
    }
    X.clear();
    AX.clear();
    const int x_block = static_cast<int>(S.size()) -
                        static_cast<int>(W.size() + P.size());
    ritz(S, AS, x_block, true);
  }
  out.iterations = it;

  // fresh recompute of the reported pairs
  const int nrep = std::min<int>(n_eigs, static_cast<int>(X.size()));
  out.mu.resize(nrep);
  out.resid.resize(nrep);
  bool ok = true;
  for (int j = 0; j < nrep; ++j) {
    Field y = apply(X[j]);
    const double m_ = l2dot(X[j], y);
    axpy(y, -m_, X[j]);
    out.mu[j] = m_;
    out.resid[j] = l2norm(y);
    if (out.resid[j] > tol_of(m_)) ok = false;
    for (const Field& z : deflate)
      out.max_overlap = std::max(out.max_overlap, std::abs(l2dot(z, X[j])));
  }
  out.converged = out.converged && ok;
  return out;
}

} // namespace

LinearizationPoint::LinearizationPoint(const Field& u,
                                       const DispersionSymbol& symbol,
                                       const NonlinearityKind& kind)
    : grid_(u.grid()), kind_(kind) {
  kind.require_admissible(grid_.dim);
  if (u.reality() != Reality::real_valued)
    throw std::invalid_argument("linearization: point must be real-valued");
  tables_ = build_tables(grid_, symbol);
  const ProblemTables& t = *tables_;
  for (double v : t.one_plus_p)
    if (!(v > 0.0))
      throw std::invalid_argument(
          "linearization: symbol is not elliptic on this grid (1 + p <= 0)");
  sqrt_one_plus_p_.resize(t.one_plus_p.size());
  for (std::size_t i = 0; i < t.one_plus_p.size(); ++i)
    sqrt_one_plus_p_[i] = std::sqrt(t.one_plus_p[i]);
  u_ = ensure_space(u, Space::physical);
  u_.set_reality(Reality::real_valued);

  const std::size_t sz = grid_.size();
  pot_plus_.resize(sz);
  pot_minus_.resize(sz);
  if (kind.variant() == NonlinearityKind::Variant::power) {
    const int k = kind.k();
    for (std::size_t i = 0; i < sz; ++i) {
      const double ur = u_[i].real();
      const double w = ipow(ur * ur, k);
      pot_minus_[i] = w;
      pot_plus_[i] = (2.0 * k + 1.0) * w;
    }
  } else {
    const HartreeKernel& ker = HartreeKernel::get(grid_, kind.truncation_radius());
    Field rho(grid_, Space::physical, Reality::real_valued);
    for (std::size_t i = 0; i < sz; ++i) {
      const double ur = u_[i].real();
      rho[i] = ur * ur;
    }
    Field pot = convolve_kernel(rho, ker);
    for (std::size_t i = 0; i < sz; ++i) {
      pot_minus_[i] = pot[i].real();
      pot_plus_[i] = pot[i].real();
    }
  }

  Field uhat = transform(u_, Space::fourier);
  Field nphat = transform(nprime(u_, kind_), Space::fourier);
  double acc = 0.0;
  for (std::size_t i = 0; i < sz; ++i) {
    const std::complex<double> r = t.one_plus_p[i] * uhat[i] - nphat[i];
    acc += std::norm(r) / t.one_plus_xi2[i];
  }
  const double num = std::sqrt(std::max(0.0, acc * grid_.fourier_weight()));
  const double den = sobolev_norm(u_, 1.0);
  pde_residual_ =
      den > 0.0 ? num / den : std::numeric_limits<double>::infinity();
}

Field LinearizationPoint::nonlinear_part(LinSign sign, const Field& g) const {
  if (g.grid() != grid_)
    throw std::invalid_argument("linearization: grid mismatch");
  Field gphys = ensure_space(g, Space::physical);
  Field out(grid_, Space::physical, gphys.reality());
  const std::vector<double>& pot =
      sign == LinSign::plus ? pot_plus_ : pot_minus_;
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = pot[i] * gphys[i];
  if (sign == LinSign::plus &&
      kind_.variant() == NonlinearityKind::Variant::hartree) {
    const HartreeKernel& ker = HartreeKernel::get(grid_, kind_.truncation_radius());
    Field ug(grid_, Space::physical, gphys.reality());
    for (std::size_t i = 0; i < ug.size(); ++i)
      ug[i] = u_[i].real() * gphys[i];
    Field pot_ug = convolve_kernel(ug, ker);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] += 2.0 * pot_ug[i] * u_[i].real();
  }
  if (g.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field LinearizationPoint::linearized(LinSign sign, const Field& g) const {
  if (g.grid() != grid_)
    throw std::invalid_argument("linearization: grid mismatch");
  Field gphys = ensure_space(g, Space::physical);
  Field hat = transform(gphys, Space::fourier);
  const ProblemTables& t = *tables_;
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= t.one_plus_p[i];
  hat.set_reality(gphys.reality());
  Field out = transform(hat, Space::physical);
  Field np = nonlinear_part(sign, gphys);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= np[i];
  out.set_reality(gphys.reality());
  if (g.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field LinearizationPoint::sandwiched(LinSign sign, const Field& g) const {
  if (g.grid() != grid_)
    throw std::invalid_argument("linearization: grid mismatch");
  const ProblemTables& t = *tables_;
  Field hat = ensure_space(g, Space::fourier);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= t.inv_sqrt_one_plus_p[i];
  hat.set_reality(g.reality());
  Field w = transform(hat, Space::physical);
  Field nhat = transform(nonlinear_part(sign, w), Space::fourier);
  for (std::size_t i = 0; i < nhat.size(); ++i)
    nhat[i] *= t.inv_sqrt_one_plus_p[i];
  nhat.set_reality(g.reality());
  if (g.space() == Space::fourier) return nhat;
  return transform(nhat, Space::physical);
}

Field LinearizationPoint::sqrt_weight(const Field& g, int exponent) const {
  if (g.grid() != grid_)
    throw std::invalid_argument("linearization: grid mismatch");
  if (exponent != 1 && exponent != -1)
    throw std::invalid_argument("linearization: sqrt_weight exponent must be +-1");
  Field hat = ensure_space(g, Space::fourier);
  const ProblemTables& t = *tables_;
  for (std::size_t i = 0; i < hat.size(); ++i)
    hat[i] *= exponent == 1 ? sqrt_one_plus_p_[i] : t.inv_sqrt_one_plus_p[i];
  hat.set_reality(g.reality());
  if (g.space() == Space::fourier) return hat;
  return transform(hat, Space::physical);
}

Field apply_linearized(LinSign sign, const Field& u, const Field& g,
                       const DispersionSymbol& symbol,
                       const NonlinearityKind& kind) {
  return LinearizationPoint(u, symbol, kind).linearized(sign, g);
}

Field apply_sandwiched(LinSign sign, const Field& u, const Field& g,
                       const DispersionSymbol& symbol,
                       const NonlinearityKind& kind) {
  return LinearizationPoint(u, symbol, kind).sandwiched(sign, g);
}

KernelResidualReport kernel_residuals(const Field& u,
                                      const DispersionSymbol& symbol,
                                      const NonlinearityKind& kind) {
  LinearizationPoint pt(u, symbol, kind);
  KernelResidualReport rep;
  rep.pde_residual = pt.pde_residual();
  rep.solution_like = rep.pde_residual < 1e-4;
  if (!rep.solution_like) {
    char buf[96];
    std::snprintf(buf, sizeof buf,
                  "not a solution: relative stationary residual %.3e",
                  rep.pde_residual);
    rep.message = buf;
  }
  const Field& up = pt.profile();
  for (int a = 0; a < up.grid().dim; ++a) {
    Field cand = derivative(up, a);
    const double den = sobolev_norm(cand, 1.0);
    const double num = sobolev_norm(pt.linearized(LinSign::plus, cand), -1.0);
    rep.rows.push_back({LinSign::plus, a, den > 0.0 ? num / den : 0.0});
  }
  const double den = sobolev_norm(up, 1.0);
  const double num = sobolev_norm(pt.linearized(LinSign::minus, up), -1.0);
  rep.rows.push_back({LinSign::minus, -1, den > 0.0 ? num / den : 0.0});
  return rep;
}

SpectrumReport beta_estimate(LinSign sign, const Field& u,
                             const DispersionSymbol& symbol,
                             const NonlinearityKind& kind, int n_eigs,
                             const EigensolveOptions& opt) {
  const int d = u.grid().dim;
  if (n_eigs < d + 2)
    throw std::invalid_argument("beta_estimate: n_eigs must be at least dim + 2");
  if (!(opt.tol > 0.0) || opt.max_iters < 1)
    throw std::invalid_argument("beta_estimate: invalid eigensolve options");
  LinearizationPoint pt(u, symbol, kind);

  SpectrumReport rep;
  rep.sign = sign;
  rep.pde_residual = pt.pde_residual();
  rep.kernel_gate = 10.0 * rep.pde_residual;

  const Field& up = pt.profile();
  std::vector<Field> cands;
  if (sign == LinSign::plus) {
    for (int a = 0; a < d; ++a) cands.push_back(derivative(up, a));
  } else {
    cands.push_back(up);
  }
  for (const Field& cfield : cands) {
    const double den = sobolev_norm(cfield, 1.0);
    const double num = sobolev_norm(pt.linearized(sign, cfield), -1.0);
    rep.kernel_residuals.push_back(den > 0.0 ? num / den : 0.0);
  }

  std::vector<Field> deflate;
  deflate.reserve(cands.size());
  for (const Field& cfield : cands) {
    Field z = pt.sqrt_weight(cfield, +1);
    strip_imag(z);
    rep.deflation_norms.push_back(l2norm(z));
    deflate.push_back(std::move(z));
  }
  for (std::size_t i = 0; i < deflate.size(); ++i) {
    for (int r = 0; r < 2; ++r)
      for (std::size_t j = 0; j < i; ++j)
        axpy(deflate[i], -l2dot(deflate[j], deflate[i]), deflate[j]);
    const double nz = l2norm(deflate[i]);
    if (!(nz > 0.0))
      throw std::invalid_argument("beta_estimate: degenerate kernel candidate");
    scal(deflate[i], 1.0 / nz);
  }

  EigenOutcome eo = lobpcg_top(pt, sign, deflate, n_eigs, opt);
  rep.eigenvalues = eo.mu;
  rep.residual_norms = eo.resid;
  rep.iterations = eo.iterations;
  rep.converged = eo.converged;
  rep.max_deflation_overlap = eo.max_overlap;

  double beta = std::numeric_limits<double>::infinity();
  double mu_min = std::numeric_limits<double>::infinity();
  for (double m_ : eo.mu) {
    mu_min = std::min(mu_min, m_);
    const double lam = 1.0 - m_;
    if (std::abs(lam) < rep.kernel_gate) {
      ++rep.excluded_as_kernel;
      continue;
    }
    if (lam < 0.0) ++rep.negative_count;
    beta = std::min(beta, std::abs(lam));
  }
  const bool have_beta = std::isfinite(beta);
  rep.beta = have_beta ? beta : 0.0;
  rep.covered = have_beta && mu_min <= 1.0 - rep.beta + 1e-12;
  rep.non_degenerate = rep.converged && rep.covered && rep.beta > 0.0;
  if (!rep.converged)
    rep.message = "eigensolver did not reach tolerance; residual norms reported";
  else if (!have_beta)
    rep.message = "all computed eigenvalues fell inside the kernel gate";
  else if (!rep.covered)
    rep.message = "computed window does not bracket 1; increase n_eigs";
  return rep;
}

} // namespace honls
