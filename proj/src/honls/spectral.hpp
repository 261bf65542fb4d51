#pragma once

// Fourier-multiplier calculus on periodic grids: multiplier application,
// weighted inner products and Sobolev norms, translation/phase action,
// radial symmetrization, seeded smooth random fields.

#include <functional>
#include <span>

#include "honls/fft.hpp"
#include "honls/grid.hpp"

namespace honls {

using SymbolFn = std::function<double(const double* xi, int dim)>;

// Symbol values over the lattice in flat storage order.
std::vector<double> lattice_table(const GridSpec& g, const SymbolFn& sym);

// Output Fourier coefficients are table[i] * uhat[i]; result is returned in
// the input's space. even_symbol controls reality-tag propagation.
Field apply_multiplier_table(const Field& f, std::span<const double> table,
                             bool even_symbol);
// Convenience overload: builds the table, checks finiteness and detects
// evenness for tag propagation.
Field apply_multiplier(const Field& f, const SymbolFn& sym);

// <u,v> = sum (1+p(xi)) uhat conj(vhat) * fourier weight.
std::complex<double> inner_product_weighted(const Field& u, const Field& v,
                                            std::span<const double> one_plus_p);
double norm_weighted(const Field& u, std::span<const double> one_plus_p);

// (sum (1+|xi|^2)^s |uhat|^2 * weight)^{1/2}
double sobolev_norm(const Field& u, double s);

// e^{i theta} u(. - a); sub-grid shifts via Fourier phases.
Field shift_and_phase(const Field& u, const double a[3], double theta);

// Cyclic index shift by whole cells; exact in physical space.
Field cyclic_shift(const Field& u, const int cells[3]);

// Projection onto fields invariant under axis permutations and sign flips,
// imaginary part dropped; idempotent, orthogonal in the real L2 pairing.
Field symmetrize_radial(const Field& u);

// Deterministic field with |uhat(xi)| = (1+|xi|^2)^{-decay/2} and seeded
// phases; returned in physical space. Requires decay > d/2 + 1.
Field random_smooth_field(const GridSpec& g, std::uint64_t seed, double decay);

// Spectral d/dx_axis; the unpaired Nyquist mode is zeroed so real fields
// stay real.
Field derivative(const Field& u, int axis);

// Fraction of (1+|xi|^2)^s-weighted mass carried by modes with any axis
// index >= ceil(n/3); the under-resolution diagnostic.
double spectral_tail_fraction(const Field& u, double s);

// Zero-pad / truncate to a grid with n_new points per axis (same box).
Field resample(const Field& u, int n_new);

double max_abs(const Field& u);
double max_imag_abs(const Field& u);

} // namespace honls
