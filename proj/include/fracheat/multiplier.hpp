#pragma once

#include "fracheat/lattice.hpp"

#include <complex>
#include <cstdint>
#include <functional>

namespace fracheat {

// Symbol m(xi) evaluated at a frequency point xi in [-pi, pi]^d.
using Multiplier = std::function<std::complex<double>(const double* xi, int d)>;

// Output field whose discrete Fourier transform on the grid equals
// m(xi_k) * uhat(xi_k). Requires grid.N >= 2*u.radius()+1 and an output
// radius at most (grid.N - 1)/2; out_radius < 0 means "same as input".
//
// Real-output policy: the imaginary residue of the inverse transform,
// relative to the largest output magnitude, is dropped silently at or
// below 1e-12, dropped with a warning count in (1e-12, 1e-9], and raises
// NonRealOutput above 1e-9 (a genuinely non-even multiplier, not roundoff).
LatticeField apply_multiplier(const LatticeField& u, const Multiplier& m,
                              const TorusGrid& grid, std::int64_t out_radius = -1);

// Applications so far whose imaginary residue fell in the warn band.
std::uint64_t imag_warning_count() noexcept;
void reset_imag_warning_count() noexcept;

// (-Laplacian)^s u, the multiplier with symbol omega(xi)^s. For s = 1 this
// is the nearest-neighbor stencil 2d*u(x) - sum_j (u(x+e_j) + u(x-e_j)).
LatticeField frac_laplacian(const LatticeField& u, FracOrder s, const TorusGrid& grid,
                            std::int64_t out_radius = -1);

} // namespace fracheat
