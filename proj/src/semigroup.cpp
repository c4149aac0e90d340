#include "fracheat/semigroup.hpp"

#include "fracheat/errors.hpp"
#include "fft_engine.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <utility>

namespace fracheat {

double EvolutionResult::rescaled_norm(double p) const {
    const int d = error_field.d();
    const double inv_p = p == std::numeric_limits<double>::infinity() ? 0.0 : 1.0 / p;
    const double expo = (d / (2.0 * s)) * (1.0 - inv_p);
    return std::pow(t, expo) * error_field.norm(p);
}

EvolutionResult evolve(const LatticeField& u0, double t, FracOrder s, double tol,
                       const SynthesisOptions& opt) {
    const int d = u0.d();
    Moments m0 = moments(u0);
    const std::int64_t l0 = u0.radius();

    // widen the synthesis box by the datum radius so every error-box site
    // sees complete kernel data under the convolution; comparing an edge
    // site against the implicit zero-padding would inject the full kernel
    // value there, and for s < 1 the heavy tail turns that into a spurious
    // rescaled-error floor that no time refinement removes
    SynthesisOptions o = opt;
    o.box_mult = opt.box_mult +
                 static_cast<double>(l0) / (std::pow(t, 1.0 / (2.0 * s.s)) + 2.0);
    KernelSlice ks = synthesize_kernel(t, s, d, tol, o);
    const std::int64_t lk = ks.field.radius();

    // a noise-trimmed kernel certifies that everything beyond its box sits
    // below the transform noise floor, so the padding is harmless and the
    // full box stays usable; otherwise shrink by the datum radius
    const std::int64_t le = ks.box_trimmed ? lk : lk - l0;
    if (le < 0) {
        throw ToleranceUnreachable(
            "kernel box cannot cover the datum support within the memory budget");
    }

    std::vector<std::pair<std::array<std::int64_t, 3>, double>> support;
    u0.for_each([&](const std::int64_t* x, double v) {
        if (v != 0.0) support.push_back({{x[0], x[1], x[2]}, v});
    });

    // small supports convolve faster (and with less roundoff) as shifted sums
    LatticeField ut = [&]() -> LatticeField {
        if (support.size() <= 64) {
            LatticeField out(d, lk + l0);
            for (const auto& [y, val] : support) {
                ks.field.for_each([&](const std::int64_t* z, double g) {
                    std::int64_t x[3] = {z[0] + y[0], z[1] + y[1], z[2] + y[2]};
                    out.data()[out.flat_index(x)] += val * g;
                });
            }
            return out;
        }
        return fft::convolve_linear(ks.field, u0, lk + l0);
    }();

    LatticeField err(d, le);
    const double mass = m0.mass;
    ks.field.for_each([&](const std::int64_t* x, double g) {
        if (std::llabs(x[0]) > le || std::llabs(x[1]) > le || std::llabs(x[2]) > le) {
            return;
        }
        err.data()[err.flat_index(x)] = ut.data()[ut.flat_index(x)] - mass * g;
    });

    return EvolutionResult{t,  s.s, m0, ks.aliasing_estimate, std::move(ut),
                           std::move(err)};
}

namespace {

void check_sweep_times(const std::vector<double>& times) {
    if (times.size() < 6) {
        throw std::invalid_argument("rate sweep needs at least 6 time points");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] > 0.0) || (i > 0 && !(times[i] > times[i - 1]))) {
            throw std::invalid_argument("rate sweep times must be positive and increasing");
        }
    }
}

} // namespace

RateReport rate_sweep(const LatticeField& u0, FracOrder s, double p,
                      const std::vector<double>& times, double tol,
                      const SynthesisOptions& opt) {
    check_sweep_times(times);
    if (!(p >= 1.0)) throw std::invalid_argument("rate sweep needs p >= 1");

    SynthesisOptions o = opt;
    o.box_mult = sweep_box_mult(times.back(), s, u0.d(), opt);
    o.measure_annulus = false;

    std::vector<double> vals, raw;
    vals.reserve(times.size());
    raw.reserve(times.size());
    for (double t : times) {
        EvolutionResult er = evolve(u0, t, s, tol, o);
        raw.push_back(er.error_norm(p));
        vals.push_back(er.rescaled_norm(p));
    }
    RateReport r = fit_rate(times, std::move(vals), FitScale::loglog);
    r.raw_values = std::move(raw);
    return r;
}

RateReport no_moment_convergence_check(const LatticeField& u0_heavy, FracOrder s,
                                       const std::vector<double>& times, double tol,
                                       const SynthesisOptions& opt) {
    check_sweep_times(times);
    SynthesisOptions o = opt;
    o.box_mult = sweep_box_mult(times.back(), s, u0_heavy.d(), opt);
    o.measure_annulus = false;

    std::vector<double> vals;
    vals.reserve(times.size());
    for (double t : times) {
        EvolutionResult er = evolve(u0_heavy, t, s, tol, o);
        // an identically-zero error (datum already self-similar) is floored
        // so the informational fit stays defined
        vals.push_back(std::max(er.error_norm(1.0), 1e-280));
    }
    return fit_rate(times, std::move(vals), FitScale::loglog);
}

bool decreasing_to_small(const RateReport& r, double jitter, double final_ratio) {
    const auto& v = r.values;
    if (v.empty()) return false;
    if (v.back() <= 1e-13 * std::max(v.front(), 1e-300)) return true;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] * (1.0 + jitter)) return false;
    }
    return v.back() < final_ratio * v.front();
}

std::vector<double> dyadic_times(int lo_exp, int hi_exp) {
    if (lo_exp > hi_exp) throw std::invalid_argument("empty dyadic range");
    std::vector<double> t;
    t.reserve(static_cast<std::size_t>(hi_exp - lo_exp) + 1);
    for (int e = lo_exp; e <= hi_exp; ++e) t.push_back(std::ldexp(1.0, e));
    return t;
}

double sweep_box_mult(double t_max, FracOrder s, int d, const SynthesisOptions& opt) {
    const double width = std::pow(t_max, 1.0 / (2.0 * s.s));
    const double cap =
        static_cast<double>(max_feasible_box_radius(d, opt)) / (width + 2.0);
    return std::clamp(cap, 0.25, opt.box_mult);
}

LatticeField heavy_tail_datum(int d, std::int64_t radius, double* tail_error) {
    if (radius < 1) throw std::invalid_argument("heavy-tail datum needs radius >= 1");
    LatticeField u(d, radius);
    double* v = u.data();
    const double expo = -0.5 * (d + 1);
    std::int64_t i = 0;
    std::array<std::int64_t, 3> x{-radius, d > 1 ? -radius : 0, d > 2 ? -radius : 0};
    const std::int64_t n = u.size();
    for (std::int64_t k = 0; k < n; ++k) {
        double r2 = 0.0;
        for (int j = 0; j < d; ++j) {
            r2 += static_cast<double>(x[static_cast<std::size_t>(j)]) *
                  static_cast<double>(x[static_cast<std::size_t>(j)]);
        }
        v[i++] = r2 == 0.0 ? 1.0 : std::pow(r2, expo);
        for (int j = d - 1; j >= 0; --j) {
            auto& c = x[static_cast<std::size_t>(j)];
            if (c < radius) {
                ++c;
                break;
            }
            c = -radius;
        }
    }
    const double box_mass = u.mass();
    // integral bound on the cut |x|^{-(d+1)} mass beyond the box
    const double shell_coeff = d == 1 ? 2.0 : (d == 2 ? 2.0 * 3.14159265358979324 : 0.0);
    double tail = d < 3 ? shell_coeff / static_cast<double>(radius)
                        : 4.0 * 3.14159265358979324 / static_cast<double>(radius);
    for (std::int64_t k = 0; k < n; ++k) v[k] /= box_mass;
    if (tail_error != nullptr) *tail_error = tail / (box_mass + tail);
    return u;
}

} // namespace fracheat
