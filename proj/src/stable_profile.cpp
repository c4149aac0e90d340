#include "fracheat/stable_profile.hpp"

#include "fracheat/errors.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

namespace fracheat {

namespace {

constexpr double kPi = 3.14159265358979323846;

} // namespace

StableProfileEvaluator::StableProfileEvaluator(FracOrder s, int d, double tol,
                                               double eta_max)
    : d_(d), s_(s.s), tol_(tol), eta_max_(eta_max) {
    if (d < 1 || d > 3) throw std::invalid_argument("profile dimension must be 1, 2 or 3");
    if (!(tol > 1e-13 && tol < 1e-2)) {
        throw std::invalid_argument("profile tolerance must lie in (1e-13, 1e-2)");
    }
    if (!(eta_max > 0.0)) throw std::invalid_argument("eta_max must be positive");

    // e^{-R^{2s}} times the box volume must sit under tol/2; one fixed-point
    // pass on the volume factor suffices
    const double r0 = std::pow(std::log(4.0 / tol), 1.0 / (2.0 * s_));
    const double vol = std::max(1.0, std::pow(2.0 * r0, d_));
    R_ = std::pow(std::log(4.0 * vol / tol), 1.0 / (2.0 * s_));

    const double probes[3] = {0.0, 0.37 * eta_max, eta_max};
    double h = 0.5;
    std::array<double, 3> prev{};
    for (int i = 0; i < 3; ++i) {
        double e[3] = {probes[i], 0.0, 0.0};
        prev[static_cast<std::size_t>(i)] = quad(e, h, false);
    }
    bool converged = false;
    for (int level = 0; level < 18 && !converged; ++level) {
        const double hh = h * 0.5;
        converged = true;
        for (int i = 0; i < 3; ++i) {
            double e[3] = {probes[i], 0.0, 0.0};
            double v = quad(e, hh, false);
            if (std::fabs(v - prev[static_cast<std::size_t>(i)]) >= tol / 4.0) {
                converged = false;
            }
            prev[static_cast<std::size_t>(i)] = v;
        }
        h = hh;
    }
    if (!converged) {
        throw QuadratureStalled("profile quadrature spacing did not stabilize");
    }
    h_ = h;
    phi0_ = prev[0];
    if (!(phi0_ > 0.0)) throw QuadratureStalled("profile value at 0 is not positive");
}

double StableProfileEvaluator::quad(const double* eta, double h, bool deriv) const {
    const std::int64_t n = static_cast<std::int64_t>(std::ceil(2.0 * R_ / h)) + 1;
    const double heff = 2.0 * R_ / static_cast<double>(n - 1);

    long double acc = 0.0L;
    std::array<std::int64_t, 3> ix{0, 0, 0};
    const std::int64_t total = [&] {
        std::int64_t p = 1;
        for (int j = 0; j < d_; ++j) p *= n;
        return p;
    }();
    for (std::int64_t c = 0; c < total; ++c) {
        double q = 0.0, dot = 0.0, w = 1.0, z0 = 0.0;
        for (int j = 0; j < d_; ++j) {
            const std::int64_t i = ix[static_cast<std::size_t>(j)];
            const double z = -R_ + heff * static_cast<double>(i);
            if (j == 0) z0 = z;
            q += z * z;
            dot += z * eta[j];
            if (i == 0 || i == n - 1) w *= 0.5;
        }
        const double damp = s_ == 1.0 ? std::exp(-q) : std::exp(-std::pow(q, s_));
        acc += w * damp * (deriv ? -z0 * std::sin(dot) : std::cos(dot));
        for (int j = d_ - 1; j >= 0; --j) {
            auto& i = ix[static_cast<std::size_t>(j)];
            if (i < n - 1) {
                ++i;
                break;
            }
            i = 0;
        }
    }
    double scale = 1.0;
    for (int j = 0; j < d_; ++j) scale *= heff / (2.0 * kPi);
    return static_cast<double>(acc) * scale;
}

double StableProfileEvaluator::phi(const double* eta) const {
    double q = 0.0;
    for (int j = 0; j < d_; ++j) q += eta[j] * eta[j];
    if (q > 100.0 * R_ * R_) {
        far_clips_.fetch_add(1);
        return 0.0;
    }
    return quad(eta, h_, false);
}

double StableProfileEvaluator::phi1(double eta1) const {
    double e[3] = {eta1, 0.0, 0.0};
    return phi(e);
}

double StableProfileEvaluator::dphi1(const double* eta) const {
    double q = 0.0;
    for (int j = 0; j < d_; ++j) q += eta[j] * eta[j];
    if (q > 100.0 * R_ * R_) {
        far_clips_.fetch_add(1);
        return 0.0;
    }
    return quad(eta, h_, true);
}

double scaling_limit_error(const StableProfileEvaluator& ev, const KernelSlice& ks,
                           double R_eta) {
    const int d = ev.d();
    if (ks.d != d) throw std::invalid_argument("profile and kernel dimensions differ");
    const double width = std::pow(ks.t, 1.0 / (2.0 * ev.s()));
    const std::int64_t l = ks.field.radius();
    if (static_cast<double>(l) < width * R_eta + 1.0) {
        throw std::invalid_argument("kernel box does not cover the requested eta ball");
    }

    const std::int64_t m = static_cast<std::int64_t>(std::floor(R_eta / 0.1));
    const double scale = std::pow(ks.t, d / (2.0 * ev.s()));
    double sup = 0.0;
    std::array<std::int64_t, 3> gi{-m, d > 1 ? -m : 0, d > 2 ? -m : 0};
    while (true) {
        double eta[3] = {0.0, 0.0, 0.0};
        double q = 0.0;
        for (int j = 0; j < d; ++j) {
            eta[j] = 0.1 * static_cast<double>(gi[static_cast<std::size_t>(j)]);
            q += eta[j] * eta[j];
        }
        if (q <= R_eta * R_eta) {
            std::int64_t x[3] = {0, 0, 0};
            for (int j = 0; j < d; ++j) {
                x[j] = static_cast<std::int64_t>(std::floor(width * eta[j]));
            }
            const double g = ks.field.data()[ks.field.flat_index(x)];
            sup = std::max(sup, std::fabs(scale * g - ev.phi(eta)));
        }
        int j = d - 1;
        for (; j >= 0; --j) {
            auto& i = gi[static_cast<std::size_t>(j)];
            if (i < m) {
                ++i;
                break;
            }
            i = -m;
        }
        if (j < 0) break;
    }
    return sup;
}

double scaling_limit_error(double t, FracOrder s, int d, double R_eta, double tol,
                           const SynthesisOptions& opt) {
    StableProfileEvaluator ev(s, d, std::min(tol, 1e-6), std::max(2.0 * R_eta, 4.0));
    KernelSlice ks = synthesize_kernel(t, s, d, tol, opt);
    return scaling_limit_error(ev, ks, R_eta);
}

double optimality_constant(double t, FracOrder s, int d, double p, double tol,
                           const SynthesisOptions& opt) {
    std::int64_t y[3] = {1, 0, 0};
    IncrementNorms inc = increment_norms(t, s, d, y, p, tol, opt);
    const double inv_p = p == std::numeric_limits<double>::infinity() ? 0.0 : 1.0 / p;
    const double expo = 1.0 / (2.0 * s.s) + (d / (2.0 * s.s)) * (1.0 - inv_p);
    return std::pow(t, expo) * inc.lp;
}

double optimality_limit_1d(const StableProfileEvaluator& ev, double p) {
    if (ev.d() != 1) throw std::invalid_argument("profile limit helper is d=1 only");
    if (p == std::numeric_limits<double>::infinity()) {
        double best = 0.0, best_e = 0.0;
        for (int i = 0; i <= 2000; ++i) {
            double e[1] = {0.01 * i};
            double v = std::fabs(ev.dphi1(e));
            if (v > best) {
                best = v;
                best_e = e[0];
            }
        }
        for (double step = 0.005; step > 1e-5; step *= 0.5) {
            for (int k = -1; k <= 1; k += 2) {
                double e[1] = {best_e + k * step};
                double v = std::fabs(ev.dphi1(e));
                if (v > best) {
                    best = v;
                    best_e = e[0];
                }
            }
        }
        return best;
    }
    // |dphi1| decays at least like |eta|^{-2}; [0, 60] covers well past the
    // 2% comparisons this feeds
    const double hi = 60.0, step = 0.01;
    long double acc = 0.0L;
    const std::int64_t n = static_cast<std::int64_t>(hi / step);
    for (std::int64_t i = 0; i <= n; ++i) {
        double e[1] = {step * static_cast<double>(i)};
        double v = std::pow(std::fabs(ev.dphi1(e)), p);
        acc += (i == 0 || i == n) ? 0.5L * v : static_cast<long double>(v);
    }
    // even integrand: double the half-line integral
    return static_cast<double>(std::pow(2.0L * acc * step, 1.0L / p));
}

} // namespace fracheat
