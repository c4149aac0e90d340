#pragma once

#include "fracheat/lattice.hpp"

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>

namespace fracheat {

// Synthesis policy knobs. Defaults give the standard box rule
// L = ceil(box_mult * (t^{1/(2s)} + 2)) with box_mult = 8, which places the
// box edge at eight diffusive widths plus a fixed pad of sixteen sites.
struct SynthesisOptions {
    double box_mult = 8.0;
    // advisory fraction of the memory budget one transform workspace may
    // use; the hard cap is still enforced by the budget itself
    double mem_share = 0.6;
    // re-synthesize on a doubled box to measure the tail mass directly
    bool measure_annulus = true;
};

// One time slice of the heat kernel: values on [-L, L]^d plus accuracy
// metadata. mass_grid is the kernel sum over the full synthesis period;
// periodization telescopes, so this equals the whole-lattice sum exactly
// (up to transform roundoff) no matter how small the grid is. box_mass is
// the sum over the reported box only. aliasing_estimate bounds the mass
// outside the box: the measured deficit 1 - box_mass, raised to the
// dyadic-shell extrapolation of the annulus mass when that arm runs.
struct KernelSlice {
    double t;
    double s;
    int d;
    std::int64_t grid_N;
    double mass_grid;
    double box_mass;
    double aliasing_estimate;
    bool box_capped;  // box radius was reduced to fit the memory budget
    bool box_trimmed; // outer shells below the transform noise floor dropped
    LatticeField field;
};

// Inverse-transform synthesis of G_t(x) = inverse DFT of e^{-t omega^s} with
// grid-doubling validation: grids N and 2N are compared on the box and the
// pair is accepted when the max difference is below tol/10; two further
// doublings are attempted before giving up.
// Throws: std::invalid_argument on bad t/tol/d, ToleranceUnreachable when
// doubling is exhausted (or further doubling cannot fit in memory after a
// failed comparison), BoxOverflow when even the smallest grid holding the
// box cannot be allocated.
KernelSlice synthesize_kernel(double t, FracOrder s, int d, double tol,
                              const SynthesisOptions& opt = {});

// Max of the kernel over the box (attained at the origin; tests verify the
// argmax rather than assuming it).
double kernel_sup(double t, FracOrder s, int d, double tol,
                  const SynthesisOptions& opt = {});

// Norms of G_t(. - y) - G_t over the largest box where both terms are
// inside synthesized data (no zero-padding is invented at the edge).
struct IncrementNorms {
    double t;
    double s;
    int d;
    std::array<std::int64_t, 3> y;
    double p;
    double linf;
    double l1;
    double lp;
};
IncrementNorms increment_norms_from(const KernelSlice& ks, const std::int64_t* y, double p);
IncrementNorms increment_norms(double t, FracOrder s, int d, const std::int64_t* y, double p,
                               double tol, const SynthesisOptions& opt = {});

// Largest box radius synthesizable under the advisory memory share,
// including the grid-doubling headroom.
std::int64_t max_feasible_box_radius(int d, const SynthesisOptions& opt = {});

// CSV block: one coordinate column per dimension plus the value column.
void write_kernel_csv(const KernelSlice& ks, std::ostream& os);
// JSON header with synthesis metadata (stable key order).
std::string kernel_json_header(const KernelSlice& ks);

} // namespace fracheat
