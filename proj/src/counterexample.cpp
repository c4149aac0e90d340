#include "fracheat/counterexample.hpp"

#include "fracheat/errors.hpp"
#include "util.hpp"

#include "json.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace fracheat {

double find_rho_star(const StableProfileEvaluator& ev) {
    const double quarter = ev.phi0() / 4.0;
    for (int i = 0; i <= 2000; ++i) {
        const double rho = 0.05 * i;
        double e[3] = {rho, 0.0, 0.0};
        if (ev.phi(e) <= quarter) return rho;
    }
    throw ScanExhausted("profile never fell to a quarter of its peak below rho = 100");
}

double find_rho_star(FracOrder s, int d, double tol) {
    StableProfileEvaluator ev(s, d, tol, 8.0);
    return find_rho_star(ev);
}

double find_T_star(FracOrder s, int d, double rho_star, double tol,
                   const SynthesisOptions& opt) {
    StableProfileEvaluator ev(s, d, std::min(tol, 1e-6), 8.0);
    const double phi0 = ev.phi0();
    for (int j = 0; j <= 16; ++j) {
        const double t = std::ldexp(1.0, j);
        KernelSlice ks = synthesize_kernel(t, s, d, tol, opt);
        const double scale = std::pow(t, d / (2.0 * s.s));
        std::int64_t x[3] = {
            static_cast<std::int64_t>(std::floor(std::pow(t, 1.0 / (2.0 * s.s)) * rho_star)),
            0, 0};
        if (x[0] > ks.field.radius()) continue;
        const double g0 = ks.field.data()[ks.field.flat_index(std::array<std::int64_t, 3>{0, 0, 0}.data())];
        const double gx = ks.field.data()[ks.field.flat_index(x)];
        if (scale * g0 >= 0.75 * phi0 && scale * gx <= phi0 / 3.0) return t;
    }
    throw NotReached("no dyadic time below 2^16 produced the two-point kernel gap");
}

SlowDatum build_slow_datum(const DecayProfile& phi, FracOrder s, int d,
                           int k_max, double tol, const SynthesisOptions& opt) {
    if (k_max < 1 || k_max > 8) {
        throw std::invalid_argument("slow datum depth must lie in 1..8");
    }
    SlowDatum sd;
    sd.s = s.s;
    sd.d = d;
    sd.delta = 0.5;
    sd.requested_k = k_max;

    StableProfileEvaluator ev(s, d, std::min(tol, 1e-6), 8.0);
    sd.rho_star = find_rho_star(ev);
    sd.c_star = (5.0 / 12.0) * ev.phi0();
    sd.T_star = find_T_star(s, d, sd.rho_star, tol, opt);

    double prev_t = 0.0;
    for (int k = 1; k <= k_max; ++k) {
        const double mk = std::ldexp(1.0, -k - 1);
        const double lower = std::max(sd.T_star, prev_t + 1.0);
        int j = 0;
        while (std::ldexp(1.0, j) < lower) ++j;
        double tk = std::numeric_limits<double>::quiet_NaN();
        for (; j <= 1023; ++j) {
            const double t = std::ldexp(1.0, j);
            if (!std::isfinite(t)) break;
            if (static_cast<double>(k) * phi(t) <= (sd.c_star / 2.0) * mk) {
                tk = t;
                break;
            }
        }
        if (!std::isfinite(tk)) break;
        const double xk_real = std::floor(std::pow(tk, 1.0 / (2.0 * s.s)) * sd.rho_star);
        if (!(xk_real >= 1.0) || xk_real > 4.0e18) break;
        sd.masses.push_back(mk);
        sd.times.push_back(tk);
        sd.rhs.push_back(static_cast<double>(k) * phi(tk));
        sd.sites.push_back(static_cast<std::int64_t>(xk_real));
        prev_t = tk;
    }

    int levels = static_cast<int>(sd.sites.size());
    while (levels >= 1) {
        try {
            LatticeField f(d, sd.sites[static_cast<std::size_t>(levels - 1)]);
            std::int64_t origin[3] = {0, 0, 0};
            f.data()[f.flat_index(origin)] = 1.0 - sd.delta;
            for (int k = 0; k < levels; ++k) {
                std::int64_t x[3] = {-sd.sites[static_cast<std::size_t>(k)], 0, 0};
                f.data()[f.flat_index(x)] += sd.masses[static_cast<std::size_t>(k)];
            }
            sd.datum = std::move(f);
            break;
        } catch (const BoxOverflow&) {
            --levels;
            if (levels == 0) throw;
        }
    }
    if (levels == 0) {
        throw NotReached("no finite dyadic time satisfies the level-1 decay budget");
    }
    sd.achieved_k = levels;
    sd.masses.resize(static_cast<std::size_t>(levels));
    sd.times.resize(static_cast<std::size_t>(levels));
    sd.rhs.resize(static_cast<std::size_t>(levels));
    sd.sites.resize(static_cast<std::size_t>(levels));
    sd.datum_mass = sd.datum.mass();
    return sd;
}

SlowBoundCheck verify_slow_bound(const SlowDatum& sd, int k, double tol,
                                 const SynthesisOptions& opt) {
    if (k < 1 || k > sd.achieved_k) {
        throw std::invalid_argument("slow bound level exceeds the achieved depth");
    }
    const double t = sd.times[static_cast<std::size_t>(k - 1)];
    FracOrder s(sd.s);
    KernelSlice ks = synthesize_kernel(t, s, sd.d, tol, opt);
    const LatticeField& g = ks.field;
    const std::int64_t l = g.radius();

    // err(x) = (1-delta) G(x) + sum_k m_k G(x + x_k) - G(x), evaluated on the
    // kernel box; shifts falling outside the box contribute nothing, which
    // only lowers the supremum and cannot create a false pass.
    double sup = 0.0;
    g.for_each([&](const std::int64_t* x, double gx) {
        double u = (1.0 - sd.delta) * gx;
        for (std::size_t j = 0; j < sd.sites.size(); ++j) {
            std::int64_t xs[3] = {x[0] + sd.sites[j], 0, 0};
            bool inside = std::llabs(xs[0]) <= l;
            for (int a = 1; a < sd.d; ++a) {
                xs[a] = x[a];
                inside = inside && std::llabs(xs[a]) <= l;
            }
            if (inside) u += sd.masses[j] * g.data()[g.flat_index(xs)];
        }
        sup = std::max(sup, std::fabs(u - gx));
    });

    SlowBoundCheck out;
    out.t = t;
    out.lhs = std::pow(t, sd.d / (2.0 * sd.s)) * sup;
    out.rhs = sd.rhs[static_cast<std::size_t>(k - 1)];
    out.pass = out.lhs >= out.rhs;
    return out;
}

std::string slow_datum_json(const SlowDatum& sd) {
    nlohmann::json j;
    j["s"] = sd.s;
    j["d"] = sd.d;
    j["delta"] = sd.delta;
    j["rho_star"] = sd.rho_star;
    j["c_star"] = sd.c_star;
    j["T_star"] = sd.T_star;
    j["requested_k"] = sd.requested_k;
    j["achieved_k"] = sd.achieved_k;
    j["masses"] = sd.masses;
    j["times"] = sd.times;
    j["rhs"] = sd.rhs;
    j["sites"] = sd.sites;
    j["datum_mass"] = sd.datum_mass;
    return j.dump(2);
}

} // namespace fracheat
