#pragma once

// Transform convention (fixed once, all norms reference it):
//   forward   uhat(xi) = (L/n)^d sum_x u(x) e^{-i xi.x}     (trapezoid weight)
//   backward  u(x)     = L^{-d}  sum_xi uhat(xi) e^{+i xi.x}
// Parseval: sum_x |u|^2 (L/n)^d = sum_xi |uhat|^2 L^{-d}, so the physical
// quadrature weight is cell_volume() and the Fourier weight fourier_weight().

#include "honls/grid.hpp"

namespace honls {

// In-place unnormalized DFT (sign -1 forward, +1 backward); plans are cached
// per (dim, n, sign) and shared across threads.
void dft_inplace(const GridSpec& g, std::complex<double>* v, int sign);

// Checked transform: the input's space tag must match the direction source.
Field transform(const Field& f, Space target);

// Copy-transform only when needed; no tag precondition.
Field ensure_space(const Field& f, Space target);

} // namespace honls
