#pragma once

#include "fracheat/kernel.hpp"
#include "fracheat/lattice.hpp"

#include <atomic>
#include <cstdint>

namespace fracheat {

// Tensor-trapezoid evaluator of the 2s-stable profile
//   Phi_s(eta) = (2 pi)^{-d} int_{R^d} e^{-|zeta|^{2s}} e^{i eta.zeta} d zeta
// truncated to [-R, R]^d with R from the exponential-tail rule, spacing
// halved at construction until probe evaluations (up to |eta| = eta_max)
// stabilize below tol/4. Evaluations beyond 10 R return 0 and are counted.
class StableProfileEvaluator {
public:
    StableProfileEvaluator(FracOrder s, int d, double tol, double eta_max = 12.0);

    double phi(const double* eta) const;
    double phi1(double eta1) const; // eta = eta1 * e1
    // partial derivative along the first axis (integrand gains -zeta_1 sin)
    double dphi1(const double* eta) const;

    double phi0() const { return phi0_; }
    double truncation_radius() const { return R_; }
    double spacing() const { return h_; }
    int d() const { return d_; }
    double s() const { return s_; }
    std::uint64_t far_clip_count() const { return far_clips_.load(); }

private:
    double quad(const double* eta, double h, bool deriv) const;

    int d_;
    double s_;
    double tol_;
    double eta_max_;
    double R_;
    double h_;
    double phi0_;
    mutable std::atomic<std::uint64_t> far_clips_{0};
};

// sup over the eta-grid (spacing 0.1, Euclidean ball of radius R_eta) of
//   | t^{d/(2s)} G_t(floor(t^{1/(2s)} eta)) - Phi_s(eta) |.
double scaling_limit_error(const StableProfileEvaluator& ev, const KernelSlice& ks,
                           double R_eta);
double scaling_limit_error(double t, FracOrder s, int d, double R_eta, double tol,
                           const SynthesisOptions& opt = {});

// t^{1/(2s)} * t^{(d/2s)(1-1/p)} * ||G_t(.-e1) - G_t||_p, which stabilizes
// at the R^d norm of the profile derivative (p < inf) or its sup (p = inf).
double optimality_constant(double t, FracOrder s, int d, double p, double tol,
                           const SynthesisOptions& opt = {});

// The profile-side limit of optimality_constant in d=1, by quadrature of
// |dphi1| (integral for p < inf, scanned sup for p = inf).
double optimality_limit_1d(const StableProfileEvaluator& ev, double p);

} // namespace fracheat
