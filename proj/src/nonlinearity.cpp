#include "honls/nonlinearity.hpp"

#include <cmath>
#include <cstdio>
#include <map>
#include <mutex>

namespace honls {

namespace {

double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

void require_real(const Field& u, const char* who) {
  if (u.reality() != Reality::real_valued)
    throw std::invalid_argument(std::string(who) +
                                ": linearization point must be real-valued");
}

// |u|^{2k} pointwise on the physical samples
std::vector<double> abs_pow_2k(const Field& phys, int k) {
  std::vector<double> w(phys.size());
  for (std::size_t i = 0; i < phys.size(); ++i) w[i] = ipow(std::norm(phys[i]), k);
  return w;
}

Field convolve_kernel(const Field& f, const HartreeKernel& ker) {
  // (K * f)^hat = Khat fhat under the documented transform convention
  Field hat = ensure_space(f, Space::fourier);
  for (std::size_t i = 0; i < hat.size(); ++i) hat[i] *= ker.khat[i];
  hat.set_reality(f.reality());
  return transform(hat, Space::physical);
}

} // namespace

NonlinearityKind NonlinearityKind::power(int k) {
  if (k < 1 || k > 8)
    throw std::invalid_argument("nonlinearity: power index k must be in [1, 8]");
  NonlinearityKind n;
  n.variant_ = Variant::power;
  n.k_ = k;
  return n;
}

NonlinearityKind NonlinearityKind::hartree(double truncation_radius) {
  if (truncation_radius > 0.0 && !std::isfinite(truncation_radius))
    throw std::invalid_argument("nonlinearity: non-finite truncation radius");
  NonlinearityKind n;
  n.variant_ = Variant::hartree;
  n.radius_ = truncation_radius;
  return n;
}

bool NonlinearityKind::admissible(int dim) const {
  if (variant_ == Variant::hartree) return dim == 3;
  return dim == 1 || dim == 2 || (dim == 3 && k_ == 1);
}

void NonlinearityKind::require_admissible(int dim) const {
  if (!admissible(dim))
    throw std::invalid_argument(
        "nonlinearity inadmissible in dimension " + std::to_string(dim) +
        ": power nonlinearities need d in {1,2} (any k) or d=3 with k=1; the "
        "Hartree nonlinearity needs d=3");
}

std::string NonlinearityKind::describe() const {
  if (variant_ == Variant::power) return "power k=" + std::to_string(k_);
  char buf[64];
  std::snprintf(buf, sizeof buf, "hartree R=%.17g", radius_);
  return buf;
}

const HartreeKernel& HartreeKernel::get(const GridSpec& g, double radius) {
  struct Key {
    int dim, n;
    double box, radius;
    bool operator<(const Key& o) const {
      return std::tie(dim, n, box, radius) < std::tie(o.dim, o.n, o.box, o.radius);
    }
  };
  static std::map<Key, HartreeKernel> cache;
  static std::mutex mu;
  if (g.dim != 3)
    throw std::invalid_argument("hartree kernel: requires d = 3");
  const double R = radius > 0.0 ? radius : g.box / 2.0;
  Key key{g.dim, g.n, g.box, R};
  std::lock_guard<std::mutex> lk(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  HartreeKernel ker;
  ker.radius = R;
  ker.khat.resize(g.size());
  for_each_mode(g, [&](std::size_t i, const double* xi) {
    const double s2 = xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2];
    const double s = std::sqrt(s2);
    if (s < 1e-9) {
      ker.khat[i] = 2.0 * pi * R * R;
    } else {
      const double h = std::sin(0.5 * R * s);
      ker.khat[i] = 8.0 * pi * h * h / s2; // = 4pi(1-cos(Rs))/s^2, stable
    }
  });
  return cache.emplace(key, std::move(ker)).first->second;
}

double potential_energy(const Field& u, const NonlinearityKind& kind) {
  kind.require_admissible(u.grid().dim);
  Field phys = ensure_space(u, Space::physical);
  const double w = u.grid().cell_volume();
  if (kind.variant() == NonlinearityKind::Variant::power) {
    const int k = kind.k();
    double acc = 0.0;
    for (std::size_t i = 0; i < phys.size(); ++i)
      acc += ipow(std::norm(phys[i]), k + 1);
    return acc * w / (2.0 * k + 2.0);
  }
  const HartreeKernel& ker = HartreeKernel::get(u.grid(), kind.truncation_radius());
  Field rho(u.grid(), Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < phys.size(); ++i) rho[i] = std::norm(phys[i]);
  Field pot = convolve_kernel(rho, ker);
  double acc = 0.0;
  for (std::size_t i = 0; i < phys.size(); ++i)
    acc += pot[i].real() * rho[i].real();
  return 0.25 * acc * w;
}

Field nprime(const Field& u, const NonlinearityKind& kind) {
  kind.require_admissible(u.grid().dim);
  Field phys = ensure_space(u, Space::physical);
  Field out(u.grid(), Space::physical, phys.reality());
  if (kind.variant() == NonlinearityKind::Variant::power) {
    const int k = kind.k();
    for (std::size_t i = 0; i < phys.size(); ++i)
      out[i] = ipow(std::norm(phys[i]), k) * phys[i];
  } else {
    const HartreeKernel& ker = HartreeKernel::get(u.grid(), kind.truncation_radius());
    Field rho(u.grid(), Space::physical, Reality::real_valued);
    for (std::size_t i = 0; i < phys.size(); ++i) rho[i] = std::norm(phys[i]);
    Field pot = convolve_kernel(rho, ker);
    for (std::size_t i = 0; i < phys.size(); ++i)
      out[i] = pot[i].real() * phys[i];
  }
  if (u.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field nplus(const Field& u, const Field& g, const NonlinearityKind& kind) {
  kind.require_admissible(u.grid().dim);
  require_real(u, "nplus");
  if (u.grid() != g.grid()) throw std::invalid_argument("nplus: grid mismatch");
  Field uphys = ensure_space(u, Space::physical);
  Field gphys = ensure_space(g, Space::physical);
  Field out(u.grid(), Space::physical, gphys.reality());
  if (kind.variant() == NonlinearityKind::Variant::power) {
    const int k = kind.k();
    std::vector<double> w = abs_pow_2k(uphys, k);
    const double p = 2.0 * k + 1.0;
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = p * w[i] * gphys[i];
  } else {
    const HartreeKernel& ker = HartreeKernel::get(u.grid(), kind.truncation_radius());
    Field u2(u.grid(), Space::physical, Reality::real_valued);
    Field ug(u.grid(), Space::physical, gphys.reality());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double ur = uphys[i].real();
      u2[i] = ur * ur;
      ug[i] = ur * gphys[i];
    }
    Field pot_u2 = convolve_kernel(u2, ker);
    Field pot_ug = convolve_kernel(ug, ker);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = 2.0 * pot_ug[i] * uphys[i].real() + pot_u2[i].real() * gphys[i];
  }
  if (g.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field nminus(const Field& u, const Field& g, const NonlinearityKind& kind) {
  kind.require_admissible(u.grid().dim);
  require_real(u, "nminus");
  if (u.grid() != g.grid()) throw std::invalid_argument("nminus: grid mismatch");
  Field uphys = ensure_space(u, Space::physical);
  Field gphys = ensure_space(g, Space::physical);
  Field out(u.grid(), Space::physical, gphys.reality());
  if (kind.variant() == NonlinearityKind::Variant::power) {
    std::vector<double> w = abs_pow_2k(uphys, kind.k());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = w[i] * gphys[i];
  } else {
    const HartreeKernel& ker = HartreeKernel::get(u.grid(), kind.truncation_radius());
    Field u2(u.grid(), Space::physical, Reality::real_valued);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const double ur = uphys[i].real();
      u2[i] = ur * ur;
    }
    Field pot = convolve_kernel(u2, ker);
    for (std::size_t i = 0; i < out.size(); ++i)
      out[i] = pot[i].real() * gphys[i];
  }
  if (g.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

Field hartree_potential(const Field& rho, double truncation_radius) {
  if (rho.grid().dim != 3)
    throw std::invalid_argument("hartree_potential: requires d = 3");
  Field phys = ensure_space(rho, Space::physical);
  double min_val = 0.0;
  for (const auto& z : phys.values()) min_val = std::min(min_val, z.real());
  if (min_val < -1e-12)
    std::fprintf(stderr,
                 "hartree_potential: density has negative values down to %.3e\n",
                 min_val);
  const HartreeKernel& ker = HartreeKernel::get(rho.grid(), truncation_radius);
  Field in(rho.grid(), Space::physical, Reality::real_valued);
  for (std::size_t i = 0; i < phys.size(); ++i) in[i] = phys[i].real();
  Field out = convolve_kernel(in, ker);
  if (rho.space() == Space::fourier) return transform(out, Space::fourier);
  return out;
}

double multilinear_ratio(const std::vector<Field>& fields,
                         const NonlinearityKind& kind) {
  const std::size_t arity =
      kind.variant() == NonlinearityKind::Variant::power ? 2 * kind.k() + 1 : 3;
  if (fields.size() != arity)
    throw std::invalid_argument("multilinear_ratio: expected " +
                                std::to_string(arity) + " fields");
  const GridSpec& g = fields[0].grid();
  for (const auto& f : fields)
    if (f.grid() != g) throw std::invalid_argument("multilinear_ratio: grid mismatch");
  kind.require_admissible(g.dim);

  double denom = 1.0;
  for (const auto& f : fields) denom *= sobolev_norm(f, 1.0);
  if (denom == 0.0)
    throw std::invalid_argument("multilinear_ratio: zero field");

  const double w = g.cell_volume();
  double num2 = 0.0;
  if (kind.variant() == NonlinearityKind::Variant::power) {
    std::vector<Field> phys;
    phys.reserve(arity);
    for (const auto& f : fields) phys.push_back(ensure_space(f, Space::physical));
    for (std::size_t i = 0; i < phys[0].size(); ++i) {
      std::complex<double> prod{1.0, 0.0};
      for (const auto& f : phys) prod *= f[i];
      num2 += std::norm(prod);
    }
  } else {
    const HartreeKernel& ker = HartreeKernel::get(g, kind.truncation_radius());
    Field f1 = ensure_space(fields[0], Space::physical);
    Field f2 = ensure_space(fields[1], Space::physical);
    Field f3 = ensure_space(fields[2], Space::physical);
    Field prod(g, Space::physical, Reality::complex_valued);
    for (std::size_t i = 0; i < prod.size(); ++i) prod[i] = f1[i] * f2[i];
    Field pot = convolve_kernel(prod, ker);
    for (std::size_t i = 0; i < prod.size(); ++i)
      num2 += std::norm(pot[i] * f3[i]);
  }
  return std::sqrt(num2 * w) / denom;
}

} // namespace honls
