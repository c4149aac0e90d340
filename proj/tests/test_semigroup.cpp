#include "fracheat/errors.hpp"
#include "fracheat/fit.hpp"
#include "fracheat/semigroup.hpp"
#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <initializer_list>
#include <limits>
#include <sstream>
#include <vector>

using namespace fracheat;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

TEST_CASE("point mass evolves onto the kernel with zero deviation") {
    const LatticeField u0 = LatticeField::delta(1, 0);
    const EvolutionResult ev = evolve(u0, 2.0, FracOrder(1.0), 1e-9);
    CHECK(ev.m0.mass == doctest::Approx(1.0));
    CHECK(ev.error_norm(1.0) < 1e-13);
    CHECK(ev.error_norm(kInf) < 1e-13);
    CHECK(ev.u_t.at(0) == doctest::Approx(oracle::bessel_heat_1d(2.0, 0)).epsilon(1e-9));
    CHECK(ev.u_t.at(3) == doctest::Approx(oracle::bessel_heat_1d(2.0, 3)).epsilon(1e-9));
}

TEST_CASE("two point masses evolve to the weighted kernel translates") {
    LatticeField u0(1, 1);
    u0.at(1) = 0.6;
    u0.at(-1) = 0.4;
    const EvolutionResult ev = evolve(u0, 1.0, FracOrder(1.0), 1e-10);
    for (std::int64_t x : {0, 1, 3, -2}) {
        const double want = 0.6 * oracle::bessel_heat_1d(1.0, x - 1) +
                            0.4 * oracle::bessel_heat_1d(1.0, x + 1);
        CHECK(ev.u_t.at(x) == doctest::Approx(want).epsilon(1e-9));
    }
    // mass is conserved up to the kernel mass outside the box
    CHECK(ev.u_t.mass() == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("two short steps compose into one long step") {
    const LatticeField u0 = LatticeField::delta(1, 0);
    const EvolutionResult first = evolve(u0, 0.5, FracOrder(1.0), 1e-10);
    const EvolutionResult second = evolve(first.u_t, 0.5, FracOrder(1.0), 1e-10);
    for (std::int64_t x : {0, 1, 2}) {
        CHECK(second.u_t.at(x) ==
              doctest::Approx(oracle::bessel_heat_1d(1.0, x)).epsilon(1e-8));
    }
}

TEST_CASE("similarity scaling of the deviation norms") {
    LatticeField u0(1, 1);
    u0.at(1) = 1.0;
    const double t = 8.0;
    const EvolutionResult ev = evolve(u0, t, FracOrder(0.5), 1e-7);
    CHECK(ev.rescaled_norm(1.0) == doctest::Approx(ev.error_norm(1.0)).epsilon(1e-12));
    CHECK(ev.rescaled_norm(kInf) ==
          doctest::Approx(t * ev.error_norm(kInf)).epsilon(1e-12)); // t^{d/2s} = t
    CHECK(ev.rescaled_norm(2.0) ==
          doctest::Approx(std::sqrt(t) * ev.error_norm(2.0)).epsilon(1e-12));
}

TEST_CASE("shifted point mass decays at the sharp square-root rate") {
    LatticeField u0(1, 1);
    u0.at(1) = 1.0;
    const RateReport r = rate_sweep(u0, FracOrder(1.0), kInf, dyadic_times(4, 9), 1e-9);
    REQUIRE(r.times.size() == 6);
    CHECK(r.scale == FitScale::loglog);
    CHECK(r.slope == doctest::Approx(-0.5).epsilon(0.12));
    CHECK(decreasing_to_small(r));
}

TEST_CASE("dyadic time ladders") {
    const std::vector<double> ts = dyadic_times(4, 9);
    REQUIRE(ts.size() == 6);
    CHECK(ts.front() == 16.0);
    CHECK(ts.back() == 512.0);
    for (std::size_t i = 1; i < ts.size(); ++i) CHECK(ts[i] == 2.0 * ts[i - 1]);
}

TEST_CASE("heavy-tail datum normalizes and reports its truncation") {
    double tail = -1.0;
    const LatticeField u0 = heavy_tail_datum(1, 2000, &tail);
    CHECK(u0.mass() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(tail > 0.0);
    CHECK(tail < 1e-3);
    // infinite first moment in truncation: N1 grows like log(radius)
    double tail2 = 0.0;
    const LatticeField w = heavy_tail_datum(1, 4000, &tail2);
    CHECK(moments(w).first_moment > moments(u0).first_moment + 0.1);
    CHECK(tail2 < tail);
}

TEST_CASE("no-moment datum still converges in l1, slowly") {
    double tail = 0.0;
    const LatticeField u0 = heavy_tail_datum(1, 1500, &tail);
    SynthesisOptions opt;
    opt.measure_annulus = false;
    const RateReport r =
        no_moment_convergence_check(u0, FracOrder(1.0), dyadic_times(4, 10), 1e-8, opt);
    REQUIRE(r.values.size() == 7);
    for (std::size_t i = 1; i < r.values.size(); ++i) {
        CHECK(r.values[i] < r.values[i - 1] * 1.10);
    }
    CHECK(r.values.back() < 0.7 * r.values.front());
    // far slower than any fixed power law would allow here
    CHECK(r.values.back() > 0.05 * r.values.front());
}

TEST_CASE("rate fit recovers exact power and exponential laws") {
    std::vector<double> ts = {1.0, 2.0, 4.0, 8.0, 16.0, 32.0};
    std::vector<double> vs;
    for (double t : ts) vs.push_back(3.0 * std::pow(t, -0.7));
    const RateReport pw = fit_rate(ts, vs);
    CHECK(pw.slope == doctest::Approx(-0.7).epsilon(1e-12));
    CHECK(pw.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
    CHECK(pw.max_residual < 1e-12);
    CHECK_FALSE(pw.preasymptotic);

    vs.clear();
    for (double t : ts) vs.push_back(5.0 * std::exp(-0.3 * t));
    const RateReport ex = fit_rate(ts, vs, FitScale::semilog);
    CHECK(ex.slope == doctest::Approx(-0.3).epsilon(1e-12));
    CHECK(ex.intercept == doctest::Approx(std::log(5.0)).epsilon(1e-12));

    CHECK_THROWS_AS(fit_rate({2.0, 1.0}, {1.0, 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_rate({1.0}, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(fit_rate({1.0, 2.0}, {1.0, 0.0}), DegenerateSweep);
}

TEST_CASE("rate writers emit parsable output") {
    std::vector<double> ts = {1.0, 2.0, 4.0};
    std::vector<double> vs = {1.0, 0.5, 0.25};
    RateReport r = fit_rate(ts, vs);
    std::ostringstream csv;
    write_rate_csv(r, csv);
    std::istringstream lines(csv.str());
    std::string line;
    REQUIRE(std::getline(lines, line));
    CHECK(line == "t,value");
    int rows = 0;
    while (std::getline(lines, line)) ++rows;
    CHECK(rows == 3);
    const std::string js = rate_json(r);
    CHECK(js.find("\"slope\"") != std::string::npos);
    CHECK(js.find("\"preasymptotic\"") != std::string::npos);
}
