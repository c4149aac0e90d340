#pragma once

#include "fracheat/lattice.hpp"

#include <complex>
#include <cstdint>
#include <functional>

namespace fracheat::fft {

// Smallest even 5-smooth integer >= n (FFT-friendly grid size).
std::int64_t next_smooth_even(std::int64_t n);

// Bytes of the in-place real-to-complex workspace for an N^d grid.
std::size_t r2c_workspace_bytes(int d, std::int64_t N);

// Inverse DFT of a real symbol that depends on frequency only through
// omega(xi) = 4 sum_j sin^2(xi_j/2):
//   g(x) = (1/N^d) sum_k f(omega(xi_k)) e^{i 2pi <k,x>/N},  |x_j| <= L.
// Coordinate evenness of the symbol makes g real and even; the transform
// runs as a single in-place r2c pass. grid_sum is the sum of g over the
// whole period, which telescopes to f(0) exactly in exact arithmetic.
struct EvenSynthesis {
    LatticeField box;
    double grid_sum;
    double max_imag; // worst imaginary residue after scaling (roundoff diagnostic)
};
EvenSynthesis synthesize_even_symbol(int d, std::int64_t N, std::int64_t L,
                                     const std::function<double(double)>& f_of_omega);

// Generic multiplier application on an N^d complex grid:
//   out(x) = (1/N^d) sum_k m(xi_k) uhat(xi_k) e^{i 2pi <k,x>/N},
// with uhat the DFT of u embedded periodically. Nodes xi_k are reduced to
// [-pi, pi). Requires 2*radius+1 <= N for both input and output boxes.
struct MultiplierResult {
    LatticeField box;
    double max_imag_rel; // max |Im| relative to the largest |Re| on the box
};
MultiplierResult apply_multiplier_fft(
    const LatticeField& u, std::int64_t N, std::int64_t out_radius,
    const std::function<std::complex<double>(const double*, int)>& m);

// Linear (non-circular) convolution of two box fields, exact on the output
// box as long as out_radius <= La + Lb; the grid is padded accordingly.
LatticeField convolve_linear(const LatticeField& a, const LatticeField& b,
                             std::int64_t out_radius);

} // namespace fracheat::fft
