#pragma once

// Slow-convergence construction: an initial datum made of a point mass at the
// origin plus a sparse train of receding point masses, tuned so that the
// rescaled distance to the limit kernel stays above k*phi(t_k) along a chosen
// time sequence.  Exhibits that no universal decay rate holds once the first
// moment is allowed to diverge.

#include "fracheat/kernel.hpp"
#include "fracheat/lattice.hpp"
#include "fracheat/stable_profile.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace fracheat {

// phi(t): user decay profile, decreasing to 0 on [1, inf).
using DecayProfile = std::function<double(double)>;

struct SlowDatum {
    double s = 1.0;
    int d = 1;
    double delta = 0.5;     // total mass of the receding train (untruncated)
    double rho_star = 0.0;  // profile quarter-decay radius, 0.05 grid
    double c_star = 0.0;    // (5/12) * profile value at 0
    double T_star = 1.0;    // first dyadic time with the two-point gap in place
    int requested_k = 0;
    int achieved_k = 0;     // levels actually retained (memory / time scan caps)
    std::vector<double> masses;      // m_k = 2^{-k-1}, k = 1..achieved_k
    std::vector<double> times;       // t_k, dyadic, strictly increasing
    std::vector<double> rhs;         // k * phi(t_k)
    std::vector<std::int64_t> sites; // x_k = floor(t_k^{1/2s} rho_star), datum puts m_k at -x_k e1
    double datum_mass = 0.0;         // 1 - 2^{-achieved_k-1} up to roundoff
    LatticeField datum{1, 0};
};

struct SlowBoundCheck {
    double t;
    double lhs;  // t^{d/2s} * sup over the kernel box of |u(t) - G_t|
    double rhs;  // k * phi(t_k)
    bool pass;   // lhs >= rhs
};

// Smallest rho on the 0.05 grid with phi(rho e1) <= phi(0)/4.
// Throws ScanExhausted past rho = 100.
double find_rho_star(const StableProfileEvaluator& ev);
double find_rho_star(FracOrder s, int d, double tol = 1e-6);

// Smallest dyadic t >= 1 with t^{d/2s} G_t(0) >= (3/4) phi(0) and
// t^{d/2s} G_t(x) <= (1/3) phi(0) at x = floor(t^{1/2s} rho_star).
// Throws NotReached past t = 2^16.
double find_T_star(FracOrder s, int d, double rho_star, double tol,
                   const SynthesisOptions& opt = {});

// delta = 1/2, m_k = 2^{-k-1}; t_k = smallest dyadic >= max(T_star, t_{k-1}+1)
// with k*phi(t_k) <= (c_star/2) m_k.  Levels whose time scan exhausts finite
// doubles or whose site box exceeds the memory budget are dropped from the
// top; achieved_k records what remains.  Throws only when not even k = 1 fits.
SlowDatum build_slow_datum(const DecayProfile& phi, FracOrder s, int d,
                           int k_max, double tol,
                           const SynthesisOptions& opt = {});

// Checks the level-k lower bound on the synthesized kernel box (which always
// contains the origin, where the bound concentrates).  The comparison field
// is the exact limit kernel with coefficient 1, not the mass-matched multiple
// used by evolution error fields.
SlowBoundCheck verify_slow_bound(const SlowDatum& sd, int k, double tol,
                                 const SynthesisOptions& opt = {});

std::string slow_datum_json(const SlowDatum& sd);

} // namespace fracheat
