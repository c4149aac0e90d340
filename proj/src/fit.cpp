#include "fracheat/fit.hpp"

#include "fracheat/errors.hpp"
#include "util.hpp"

#include "json.hpp"

#include <cmath>
#include <ostream>

namespace fracheat {

RateReport fit_rate(std::vector<double> times, std::vector<double> values, FitScale scale) {
    const std::size_t n = times.size();
    if (n < 2 || values.size() != n) {
        throw std::invalid_argument("rate fit needs at least two matched points");
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0 && !(times[i] > times[i - 1])) {
            throw std::invalid_argument("rate fit times must be strictly increasing");
        }
        if (scale == FitScale::loglog && !(times[i] > 0.0)) {
            throw std::invalid_argument("log-log fit needs positive times");
        }
        if (!std::isfinite(values[i]) || values[i] < 1e-300) {
            throw DegenerateSweep("sweep value " + g17(values[i]) + " at t=" +
                                  g17(times[i]) + " is degenerate");
        }
    }

    long double sx = 0.0L, sy = 0.0L, sxx = 0.0L, sxy = 0.0L;
    std::vector<double> xs(n), ys(n);
    for (std::size_t i = 0; i < n; ++i) {
        xs[i] = scale == FitScale::loglog ? std::log(times[i]) : times[i];
        ys[i] = std::log(values[i]);
        sx += xs[i];
        sy += ys[i];
        sxx += static_cast<long double>(xs[i]) * xs[i];
        sxy += static_cast<long double>(xs[i]) * ys[i];
    }
    const long double den = n * sxx - sx * sx;
    if (!(den > 0.0L)) throw DegenerateSweep("rate fit abscissa has no spread");

    RateReport r;
    r.slope = static_cast<double>((n * sxy - sx * sy) / den);
    r.intercept = static_cast<double>((sy - r.slope * sx) / n);
    double mr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mr = std::max(mr, std::fabs(ys[i] - (r.slope * xs[i] + r.intercept)));
    }
    r.max_residual = mr;
    r.preasymptotic = mr > 0.1;
    r.scale = scale;
    r.times = std::move(times);
    r.values = std::move(values);
    return r;
}

void write_rate_csv(const RateReport& r, std::ostream& os) {
    const bool has_raw = r.raw_values.size() == r.times.size();
    os << (has_raw ? "t,raw,value\n" : "t,value\n");
    for (std::size_t i = 0; i < r.times.size(); ++i) {
        os << g17(r.times[i]) << ',';
        if (has_raw) os << g17(r.raw_values[i]) << ',';
        os << g17(r.values[i]) << '\n';
    }
}

std::string rate_json(const RateReport& r) {
    nlohmann::json j;
    j["slope"] = r.slope;
    j["intercept"] = r.intercept;
    j["max_residual"] = r.max_residual;
    j["preasymptotic"] = r.preasymptotic;
    j["scale"] = r.scale == FitScale::loglog ? "loglog" : "semilog";
    j["n"] = r.times.size();
    return j.dump();
}

} // namespace fracheat
