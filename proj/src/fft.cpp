#include "honls/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <tuple>

namespace honls {

namespace {

struct PlanCache {
  std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::mutex mu;
  ~PlanCache() {
    for (auto& [k, p] : plans) fftw_destroy_plan(p);
  }
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

fftw_plan plan_for(const GridSpec& g, int sign) {
  auto key = std::make_tuple(g.dim, g.n, sign);
  PlanCache& c = cache();
  std::lock_guard<std::mutex> lk(c.mu);
  auto it = c.plans.find(key);
  if (it != c.plans.end()) return it->second;
  // FFTW_ESTIMATE keeps planning deterministic; FFTW_UNALIGNED lets the plan
  // execute on any array via the new-array interface.
  std::vector<std::complex<double>> scratch(g.size());
  int dims[3] = {g.n, g.n, g.n};
  fftw_plan p = fftw_plan_dft(g.dim, dims,
                              reinterpret_cast<fftw_complex*>(scratch.data()),
                              reinterpret_cast<fftw_complex*>(scratch.data()),
                              sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  if (!p) throw solver_failure("fftw plan creation failed");
  c.plans.emplace(key, p);
  return p;
}

} // namespace

void dft_inplace(const GridSpec& g, std::complex<double>* v, int sign) {
  fftw_plan p = plan_for(g, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(v),
                   reinterpret_cast<fftw_complex*>(v));
}

Field transform(const Field& f, Space target) {
  if (f.space() == target)
    throw std::invalid_argument("transform: field is already in the target space");
  Field out = f;
  if (target == Space::fourier) {
    dft_inplace(f.grid(), out.data(), FFTW_FORWARD);
    const double w = f.grid().cell_volume();
    for (auto& z : out.values()) z *= w;
  } else {
    dft_inplace(f.grid(), out.data(), FFTW_BACKWARD);
    const double w = f.grid().fourier_weight();
    for (auto& z : out.values()) z *= w;
  }
  out.set_space(target);
  return out;
}

Field ensure_space(const Field& f, Space target) {
  return f.space() == target ? f : transform(f, target);
}

} // namespace honls
