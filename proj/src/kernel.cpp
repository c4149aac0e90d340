#include "fracheat/kernel.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/memory.hpp"
#include "fft_engine.hpp"
#include "util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

namespace fracheat {

namespace {

bool is_smooth_even(std::int64_t n) {
    if (n < 4 || n % 2 != 0) return false;
    while (n % 2 == 0) n /= 2;
    while (n % 3 == 0) n /= 3;
    while (n % 5 == 0) n /= 5;
    return n == 1;
}

std::int64_t prev_smooth_even(std::int64_t n) {
    n -= n % 2;
    for (; n > 4; n -= 2) {
        if (is_smooth_even(n)) return n;
    }
    return 4;
}

// Distance beyond which the kernel drops below eps pointwise. Heavy tail
// t |x|^{-d-2s} for s away from 1, Gaussian width for s = 1, the smaller of
// the two in the crossover band.
double tail_distance(double t, double s, int d, double eps) {
    double heavy = std::pow(t / eps, 1.0 / (d + 2.0 * s));
    if (s < 0.95) return heavy;
    double gauss = std::sqrt(std::max(4.0 * t * std::log(1.0 / eps), 0.0)) + 8.0;
    return s < 1.0 ? std::min(heavy, gauss) : gauss;
}

// Largest smooth even grid whose workspace fits the advisory share.
std::int64_t feasible_grid(int d, double share_bytes) {
    double n_est = 0.0;
    if (d == 1) {
        n_est = share_bytes / 8.0 - 2.0;
    } else if (d == 2) {
        n_est = std::sqrt(share_bytes / 8.0);
    } else {
        n_est = std::cbrt(share_bytes / 8.0);
    }
    n_est = std::min(n_est, 4e9);
    std::int64_t n = prev_smooth_even(static_cast<std::int64_t>(n_est));
    while (n > 4 &&
           static_cast<double>(fft::r2c_workspace_bytes(d, n)) > share_bytes) {
        n = prev_smooth_even(n - 2);
    }
    return n;
}

double max_box_diff(const LatticeField& a, const LatticeField& b) {
    double m = 0.0;
    const double* pa = a.data();
    const double* pb = b.data();
    const std::int64_t n = a.size();
    for (std::int64_t i = 0; i < n; ++i) m = std::max(m, std::fabs(pa[i] - pb[i]));
    return m;
}

} // namespace

KernelSlice synthesize_kernel(double t, FracOrder s, int d, double tol,
                              const SynthesisOptions& opt) {
    if (!(t > 0.0) || !std::isfinite(t)) {
        throw std::invalid_argument("kernel time must be positive and finite");
    }
    if (!(tol > 1e-14 && tol < 1e-2)) {
        throw std::invalid_argument("kernel tolerance must lie in (1e-14, 1e-2)");
    }
    if (d < 1 || d > 3) throw std::invalid_argument("kernel dimension must be 1, 2 or 3");
    if (!(opt.box_mult > 0.0) || !(opt.mem_share > 0.0 && opt.mem_share <= 1.0)) {
        throw std::invalid_argument("bad synthesis options");
    }

    const double sv = s.s;
    const double width = std::pow(t, 1.0 / (2.0 * sv));
    const double l_policy_f = std::ceil(opt.box_mult * (width + 2.0));
    if (l_policy_f > 1e15) throw BoxOverflow("kernel box radius out of range");
    const std::int64_t l_policy = static_cast<std::int64_t>(l_policy_f);

    const double share =
        opt.mem_share * static_cast<double>(MemoryBudget::instance().cap_bytes());
    const std::int64_t n_feas = feasible_grid(d, share);
    // leave a factor-2 grid headroom so the doubling pair always fits
    std::int64_t l_box = std::min(l_policy, (n_feas - 4) / 4);
    if (l_box < 1) throw BoxOverflow("memory budget cannot hold any kernel box");
    const bool capped = l_box < l_policy;

    const double eps = tol / 20.0;
    const std::int64_t tail_i = static_cast<std::int64_t>(
        std::ceil(std::min(tail_distance(t, sv, d, eps), 1e15)));
    const std::int64_t box_driven = 2 * l_box + 2;
    const std::int64_t target =
        std::max(box_driven, std::min(l_box + tail_i, std::max(box_driven, n_feas / 2)));
    const std::int64_t grid_a = fft::next_smooth_even(target);

    auto symbol = [t, sv](double w) {
        return sv == 1.0 ? std::exp(-t * w) : std::exp(-t * std::pow(w, sv));
    };
    auto synth = [&](std::int64_t n) {
        return fft::synthesize_even_symbol(d, n, l_box, symbol);
    };

    // comparison ladder: a cheap half-grid pair first when it is a genuine
    // contrast, then exact doublings
    std::vector<std::int64_t> grids;
    const std::int64_t coarse = fft::next_smooth_even(std::max(grid_a / 2, box_driven));
    if (coarse * 5 <= grid_a * 3) grids.push_back(coarse);
    for (std::int64_t g = grid_a; grids.size() < 4; g *= 2) grids.push_back(g);

    fft::EvenSynthesis cur = synth(grids[0]);
    bool accepted = false;
    fft::EvenSynthesis best = std::move(cur);
    std::int64_t best_n = grids[0];
    double last_diff = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < grids.size() && !accepted; ++i) {
        fft::EvenSynthesis next = [&] {
            try {
                return synth(grids[i]);
            } catch (const BoxOverflow&) {
                if (i == 1) throw; // not even the base pair fits
                throw ToleranceUnreachable(
                    "grid refinement stalled at N=" + std::to_string(grids[i - 1]) +
                    ": next doubling does not fit the memory budget (last box diff " +
                    g17(last_diff) + ", need < " + g17(tol / 10.0) + ")");
            }
        }();
        last_diff = max_box_diff(best.box, next.box);
        best = std::move(next);
        best_n = grids[i];
        accepted = last_diff < tol / 10.0;
    }
    if (!accepted) {
        throw ToleranceUnreachable("grid doubling did not converge: last box diff " +
                                   g17(last_diff) + " at N=" + std::to_string(best_n) +
                                   ", need < " + g17(tol / 10.0));
    }

    const double g0 = best.box.at(0);
    if (!(g0 > 0.0)) throw ToleranceUnreachable("synthesized kernel peak is not positive");
    if (best.max_imag / g0 > 1e-9) {
        throw NonRealOutput("kernel synthesis imaginary residue ratio " +
                            g17(best.max_imag / g0));
    }

    // shell minima; outer shells below the transform noise floor are noise,
    // not kernel, and are not reported
    std::vector<double> shell_min(static_cast<std::size_t>(l_box) + 1,
                                  std::numeric_limits<double>::infinity());
    best.box.for_each([&](const std::int64_t* x, double v) {
        std::int64_t r = 0;
        for (int j = 0; j < d; ++j) r = std::max<std::int64_t>(r, std::llabs(x[j]));
        auto& m = shell_min[static_cast<std::size_t>(r)];
        m = std::min(m, v);
    });
    const double noise_floor = 1e-13 * g0;
    const std::int64_t keep_min =
        std::min(l_box, static_cast<std::int64_t>(std::ceil(2.0 * width)) + 4);
    std::int64_t keep = l_box;
    while (keep > keep_min && shell_min[static_cast<std::size_t>(keep)] < noise_floor) {
        --keep;
    }
    const bool trimmed = keep < l_box;

    LatticeField field = [&]() -> LatticeField {
        if (!trimmed) return std::move(best.box);
        LatticeField f(d, keep);
        best.box.for_each([&](const std::int64_t* x, double v) {
            for (int j = 0; j < d; ++j) {
                if (std::llabs(x[j]) > keep) return;
            }
            f.data()[f.flat_index(x)] = v;
        });
        return f;
    }();

    const double box_mass = field.mass();
    double aliasing = std::max(0.0, 1.0 - box_mass);

    if (opt.measure_annulus && !capped) {
        const std::int64_t l2 = 2 * keep;
        const std::int64_t n_ann = fft::next_smooth_even(std::max(2 * l2 + 2, l2 + tail_i));
        if (static_cast<double>(fft::r2c_workspace_bytes(d, n_ann)) <= share) {
            fft::EvenSynthesis wide = fft::synthesize_even_symbol(d, n_ann, l2, symbol);
            long double ann = 0.0L;
            wide.box.for_each([&](const std::int64_t* x, double v) {
                std::int64_t r = 0;
                for (int j = 0; j < d; ++j) r = std::max<std::int64_t>(r, std::llabs(x[j]));
                if (r > keep) ann += v;
            });
            // annulus shells [2^k L, 2^{k+1} L] shrink by about 4^{-s} each;
            // extrapolate the geometric tail with a 25% safety factor
            const double extrap =
                1.25 * static_cast<double>(ann) / (1.0 - std::pow(4.0, -sv));
            aliasing = std::max(aliasing, extrap);
        }
    }

    return KernelSlice{t,        sv,     d,       best_n, best.grid_sum,
                       box_mass, aliasing, capped, trimmed, std::move(field)};
}

double kernel_sup(double t, FracOrder s, int d, double tol, const SynthesisOptions& opt) {
    return synthesize_kernel(t, s, d, tol, opt).field.sup_norm();
}

std::int64_t max_feasible_box_radius(int d, const SynthesisOptions& opt) {
    if (d < 1 || d > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
    const double share =
        opt.mem_share * static_cast<double>(MemoryBudget::instance().cap_bytes());
    return (feasible_grid(d, share) - 4) / 4;
}

IncrementNorms increment_norms_from(const KernelSlice& ks, const std::int64_t* y, double p) {
    const int d = ks.d;
    const std::int64_t l = ks.field.radius();
    std::array<std::int64_t, 3> yy{0, 0, 0};
    for (int j = 0; j < d; ++j) {
        yy[static_cast<std::size_t>(j)] = y[j];
        if (2 * std::llabs(y[j]) > l) {
            throw ShiftTooLarge("shift component " + std::to_string(y[j]) +
                                " exceeds half the box radius " + std::to_string(l));
        }
    }

    // x ranges where both x and x - y are inside the box
    std::int64_t lo[3] = {0, 0, 0}, hi[3] = {0, 0, 0};
    for (int j = 0; j < 3; ++j) {
        std::int64_t c = j < d ? yy[static_cast<std::size_t>(j)] : 0;
        lo[j] = std::max(-l, c - l);
        hi[j] = std::min(l, c + l);
        if (j >= d) lo[j] = hi[j] = 0;
    }

    const double* v = ks.field.data();
    const std::int64_t side = ks.field.side();
    auto idx = [&](std::int64_t x0, std::int64_t x1, std::int64_t x2) {
        std::int64_t i = x0 + l;
        if (d > 1) i = i * side + (x1 + l);
        if (d > 2) i = i * side + (x2 + l);
        return i;
    };

    const bool p_inf = p == std::numeric_limits<double>::infinity();
    long double acc1 = 0.0L, accp = 0.0L;
    double linf = 0.0;
    for (std::int64_t x0 = lo[0]; x0 <= hi[0]; ++x0) {
        for (std::int64_t x1 = lo[1]; x1 <= hi[1]; ++x1) {
            for (std::int64_t x2 = lo[2]; x2 <= hi[2]; ++x2) {
                double diff = v[idx(x0 - yy[0], x1 - yy[1], x2 - yy[2])] -
                              v[idx(x0, x1, x2)];
                double a = std::fabs(diff);
                linf = std::max(linf, a);
                acc1 += a;
                if (!p_inf && p != 1.0 && a > 0.0) {
                    accp += std::pow(static_cast<long double>(a),
                                     static_cast<long double>(p));
                }
            }
        }
    }
    double l1 = static_cast<double>(acc1);
    double lp;
    if (p_inf) {
        lp = linf;
    } else if (p == 1.0) {
        lp = l1;
    } else {
        lp = static_cast<double>(
            std::pow(accp, 1.0L / static_cast<long double>(p)));
    }
    return IncrementNorms{ks.t, ks.s, d, yy, p, linf, l1, lp};
}

IncrementNorms increment_norms(double t, FracOrder s, int d, const std::int64_t* y, double p,
                               double tol, const SynthesisOptions& opt) {
    KernelSlice ks = synthesize_kernel(t, s, d, tol, opt);
    return increment_norms_from(ks, y, p);
}

void write_kernel_csv(const KernelSlice& ks, std::ostream& os) {
    const int d = ks.d;
    os << "x0";
    for (int j = 1; j < d; ++j) os << ",x" << j;
    os << ",value\n";
    ks.field.for_each([&](const std::int64_t* x, double v) {
        os << x[0];
        for (int j = 1; j < d; ++j) os << ',' << x[j];
        os << ',' << g17(v) << '\n';
    });
}

std::string kernel_json_header(const KernelSlice& ks) {
    nlohmann::json j;
    j["t"] = ks.t;
    j["s"] = ks.s;
    j["d"] = ks.d;
    j["N"] = ks.grid_N;
    j["L"] = ks.field.radius();
    j["aliasing_estimate"] = ks.aliasing_estimate;
    j["mass_grid"] = ks.mass_grid;
    j["box_mass"] = ks.box_mass;
    j["box_capped"] = ks.box_capped;
    j["box_trimmed"] = ks.box_trimmed;
    return j.dump();
}

} // namespace fracheat
