#pragma once

#include "fracheat/fit.hpp"
#include "fracheat/kernel.hpp"
#include "fracheat/lattice.hpp"

#include <vector>

namespace fracheat {

// Evolution snapshot: u(t) = G_t * u0 on a box of radius L_kernel + L_u0.
// The deviation from the mass-projected kernel is restricted to the box of
// radius L_kernel - L_u0, where every convolution term falls on synthesized
// kernel data and no zero-padding enters the comparison; when the kernel
// box was noise-trimmed the padding sits below the trim floor and the full
// kernel box is kept instead.
struct EvolutionResult {
    double t;
    double s;
    Moments m0; // of u0
    double kernel_aliasing;
    LatticeField u_t;
    LatticeField error_field; // u_t - M * G_t

    double error_norm(double p) const { return error_field.norm(p); }
    // t^{(d/2s)(1-1/p)} ||u(t) - M G_t||_p, the similarity-scaled error
    double rescaled_norm(double p) const;
};

EvolutionResult evolve(const LatticeField& u0, double t, FracOrder s, double tol,
                       const SynthesisOptions& opt = {});

// Rescaled-error decay fit over the time grid (at least 6 points).
// raw_values carries the unscaled norms for the CSV companion column.
RateReport rate_sweep(const LatticeField& u0, FracOrder s, double p,
                      const std::vector<double>& times, double tol,
                      const SynthesisOptions& opt = {});

// Plain l1 error sequence for data without a usable first moment; the fit
// exists for reporting only, no rate is asserted.
RateReport no_moment_convergence_check(const LatticeField& u0_heavy, FracOrder s,
                                       const std::vector<double>& times, double tol,
                                       const SynthesisOptions& opt = {});

// Monotone within the jitter allowance and ending below final_ratio of the
// first value; the qualitative notion of "decreasing to small".
bool decreasing_to_small(const RateReport& r, double jitter = 0.10,
                         double final_ratio = 0.25);

// {2^lo, ..., 2^hi}
std::vector<double> dyadic_times(int lo_exp, int hi_exp);

// Largest box multiplier <= opt.box_mult whose box at t_max still fits the
// memory budget; sweeps hold the multiplier fixed across times so the
// captured mass fraction stays level and slopes stay unbiased.
double sweep_box_mult(double t_max, FracOrder s, int d, const SynthesisOptions& opt = {});

// |x|^{-(d+1)} profile (value 1 at the origin) truncated at the given
// radius and normalized to unit mass; *tail_error receives the relative
// l1 mass cut off by the truncation.
LatticeField heavy_tail_datum(int d, std::int64_t radius, double* tail_error = nullptr);

} // namespace fracheat
