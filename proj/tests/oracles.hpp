#pragma once

#include <cstdint>

// Reference values computed by routes that share no code with the library:
// power series, one-dimensional quadrature of classical integral identities,
// and closed-form profiles. Everything here is deliberately scalar and slow.
namespace oracle {

// Scaled modified Bessel function e^{-z} I_n(z), n >= 0, z >= 0.
// Power series for z <= 300, truncated theta-integral
// (1/pi) int_0^pi e^{-z(1-cos f)} cos(n f) df beyond.
double ivx(std::int64_t n, double z);

// Classical (s=1) lattice heat kernel: d=1 value e^{-2t} I_|x|(2t),
// d-dimensional value the product over coordinates.
double bessel_heat_1d(double t, std::int64_t x);
double bessel_heat_nd(double t, const std::int64_t* x, int d);

// s = 1/2 kernel in d=1 through the subordination identity
//   G_t^(1/2)(x) = int_0^inf e^{-2r} I_x(2r) eta(r) dr,
//   eta(r) = t r^{-3/2} e^{-t^2/(4r)} / (2 sqrt(pi)),
// evaluated after the substitution u = t/(2 sqrt(r)) which turns the
// weight into (2/sqrt(pi)) e^{-u^2} du on (0, inf).
double subordinated_half_kernel_1d(double t, std::int64_t x, double tol);

// (-Laplacian)^s delta_0 at x in d=1, 0 < s < 1, through the integral
//   (s/Gamma(1-s)) int_0^inf (delta_{x,0} - e^{-2r} I_|x|(2r)) r^{-1-s} dr
// on a logarithmic grid.
double frac_laplacian_delta_bochner_1d(double s, std::int64_t x, double tol);

// Closed-form limit profiles. Gaussian: (4 pi)^{-d/2} e^{-|eta|^2/4}.
// Cauchy (s = 1/2): d=1 value (1/pi)(1+eta^2)^{-1},
// d=2 value (2 pi)^{-1} (1+|eta|^2)^{-3/2}.
double gaussian_profile(int d, const double* eta);
double gaussian_dprofile1_1d(double eta); // d/d eta of the d=1 Gaussian profile
double cauchy_profile_1d(double eta);
double cauchy_profile_2d(const double* eta);

// sup over eta of |d/d eta Gaussian profile| in d=1, located by scan plus
// parabolic refinement (no calculus shortcut).
double gaussian_dphi1_sup_1d();

// integral over R of |d/d eta Cauchy profile| in d=1: substituting
// v = 1+eta^2 gives 2 * (1/pi) int_1^inf v^{-2} dv = 2/pi.
double cauchy_dphi1_l1_1d();

} // namespace oracle
