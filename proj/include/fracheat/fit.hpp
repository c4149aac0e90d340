#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace fracheat {

// Abscissa transform of the least-squares line: log t for power laws
// (slope = exponent), plain t for exponential decay (slope = -rate).
enum class FitScale { loglog, semilog };

// Line fit through (x_i, log v_i). A fit with max_residual above 0.1 is
// flagged preasymptotic rather than rejected: decay laws here are
// asymptotic statements with unknown onset.
struct RateReport {
    std::vector<double> times;
    std::vector<double> values;     // fitted ordinate (positive)
    std::vector<double> raw_values; // optional companion column for CSV
    FitScale scale = FitScale::loglog;
    double slope = 0.0;
    double intercept = 0.0;
    double max_residual = 0.0;
    bool preasymptotic = false;
};

// Throws std::invalid_argument unless times are strictly increasing (and
// positive for loglog) with at least two points; throws DegenerateSweep
// when a value is non-finite or below 1e-300.
RateReport fit_rate(std::vector<double> times, std::vector<double> values,
                    FitScale scale = FitScale::loglog);

// CSV columns: t,value or t,raw,value when the companion column is present.
void write_rate_csv(const RateReport& r, std::ostream& os);
// JSON with slope, intercept, max_residual, preasymptotic, scale, n.
std::string rate_json(const RateReport& r);

} // namespace fracheat
