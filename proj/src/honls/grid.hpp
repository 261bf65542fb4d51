#pragma once

// Periodic d-dimensional lattice and complex field samples. Every function the
// library touches lives on one of these grids, in physical or Fourier space.

#include <complex>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace honls {

inline constexpr double pi = 3.14159265358979323846264338327950288;

struct solver_failure : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct io_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GridSpec {
  int dim = 0;
  int n = 0;        // points per axis, power of two >= 8
  double box = 0.0; // box length L; domain is [-L/2, L/2) per axis

  double dx() const { return box / n; }
  std::size_t size() const {
    std::size_t s = 1;
    for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(n);
    return s;
  }
  double cell_volume() const {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w *= dx();
    return w;
  }
  // quadrature weight of one Fourier mode; see fft.hpp for the convention
  double fourier_weight() const {
    double w = 1.0;
    for (int a = 0; a < dim; ++a) w /= box;
    return w;
  }
  // signed lattice index in {-n/2, ..., n/2-1} for storage index i in [0, n)
  int signed_index(int i) const { return (i <= n / 2 - 1) ? i : i - n; }
  double xi(int i) const { return 2.0 * pi * signed_index(i) / box; }
  double coord(int i) const { return signed_index(i) * dx(); }
  // storage index of the negated lattice point (0 and Nyquist are fixed)
  int negate(int i) const { return (n - i) % n; }

  bool operator==(const GridSpec& o) const {
    return dim == o.dim && n == o.n && box == o.box;
  }
  bool operator!=(const GridSpec& o) const { return !(*this == o); }
};

GridSpec make_grid(int dim, int n, double box);

enum class Space { physical, fourier };
enum class Reality { real_valued, complex_valued };

class Field {
public:
  Field() = default;
  Field(const GridSpec& g, Space s, Reality r)
      : grid_(g), space_(s), reality_(r), values_(g.size()) {}

  const GridSpec& grid() const { return grid_; }
  Space space() const { return space_; }
  Reality reality() const { return reality_; }
  std::size_t size() const { return values_.size(); }

  const std::complex<double>* data() const { return values_.data(); }
  std::complex<double>* data() { return values_.data(); }
  const std::vector<std::complex<double>>& values() const { return values_; }
  std::vector<std::complex<double>>& values() { return values_; }
  std::complex<double> operator[](std::size_t i) const { return values_[i]; }
  std::complex<double>& operator[](std::size_t i) { return values_[i]; }

  void set_space(Space s) { space_ = s; }
  void set_reality(Reality r) { reality_ = r; }

private:
  GridSpec grid_;
  Space space_ = Space::physical;
  Reality reality_ = Reality::complex_valued;
  std::vector<std::complex<double>> values_;
};

// Flat storage is row-major with the last axis contiguous (FFTW layout).
// Calls f(flat_index, xi) with xi the per-axis wavenumbers of that mode.
template <class F>
void for_each_mode(const GridSpec& g, F&& f) {
  const int n = g.n;
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = g.xi(i);
  double xi[3] = {0.0, 0.0, 0.0};
  std::size_t idx = 0;
  if (g.dim == 1) {
    for (int i0 = 0; i0 < n; ++i0) { xi[0] = ax[i0]; f(idx++, xi); }
  } else if (g.dim == 2) {
    for (int i0 = 0; i0 < n; ++i0) {
      xi[0] = ax[i0];
      for (int i1 = 0; i1 < n; ++i1) { xi[1] = ax[i1]; f(idx++, xi); }
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      xi[0] = ax[i0];
      for (int i1 = 0; i1 < n; ++i1) {
        xi[1] = ax[i1];
        for (int i2 = 0; i2 < n; ++i2) { xi[2] = ax[i2]; f(idx++, xi); }
      }
    }
  }
}

// Same traversal over physical coordinates x.
template <class F>
void for_each_point(const GridSpec& g, F&& f) {
  const int n = g.n;
  std::vector<double> ax(n);
  for (int i = 0; i < n; ++i) ax[i] = g.coord(i);
  double x[3] = {0.0, 0.0, 0.0};
  std::size_t idx = 0;
  if (g.dim == 1) {
    for (int i0 = 0; i0 < n; ++i0) { x[0] = ax[i0]; f(idx++, x); }
  } else if (g.dim == 2) {
    for (int i0 = 0; i0 < n; ++i0) {
      x[0] = ax[i0];
      for (int i1 = 0; i1 < n; ++i1) { x[1] = ax[i1]; f(idx++, x); }
    }
  } else {
    for (int i0 = 0; i0 < n; ++i0) {
      x[0] = ax[i0];
      for (int i1 = 0; i1 < n; ++i1) {
        x[1] = ax[i1];
        for (int i2 = 0; i2 < n; ++i2) { x[2] = ax[i2]; f(idx++, x); }
      }
    }
  }
}

// Decode flat index into per-axis storage indices.
inline void decode_index(const GridSpec& g, std::size_t idx, int out[3]) {
  const std::size_t n = static_cast<std::size_t>(g.n);
  out[0] = out[1] = out[2] = 0;
  for (int a = g.dim - 1; a >= 0; --a) {
    out[a] = static_cast<int>(idx % n);
    idx /= n;
  }
}

inline std::size_t encode_index(const GridSpec& g, const int ix[3]) {
  std::size_t idx = 0;
  for (int a = 0; a < g.dim; ++a)
    idx = idx * static_cast<std::size_t>(g.n) + static_cast<std::size_t>(ix[a]);
  return idx;
}

} // namespace honls
