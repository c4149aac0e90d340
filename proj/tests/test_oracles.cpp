// The reference implementations the numerical tests trust: scaled Bessel
// values, the subordination quadrature, the half-power Bochner integral, and
// the closed-form limit profiles.  Pinned values come from 30-digit
// arbitrary-precision arithmetic done offline.

#include "oracles.hpp"

#include "doctest.h"

#include <cmath>
#include <initializer_list>

namespace {
constexpr double kPi = 3.14159265358979323846;
}

TEST_CASE("scaled Bessel values against high-precision pins") {
    CHECK(oracle::ivx(0, 2.0) == doctest::Approx(0.30850832255367104).epsilon(1e-13));
    CHECK(oracle::ivx(2, 2.0) == doctest::Approx(0.09323903330473338).epsilon(1e-13));
    CHECK(oracle::ivx(0, 300.0) == doctest::Approx(0.023042558415085462).epsilon(1e-12));
    CHECK(oracle::ivx(7, 300.0) == doctest::Approx(0.021232719022780372).epsilon(1e-12));
    CHECK(oracle::ivx(3, 295.0) == doctest::Approx(0.022884812079721862).epsilon(1e-12));
    CHECK(oracle::ivx(3, 305.0) == doctest::Approx(0.022517507462010442).epsilon(1e-12));
    CHECK(oracle::ivx(12, 1200.0) == doctest::Approx(0.010846668874092041).epsilon(1e-12));
    CHECK(oracle::ivx(40, 10.0) == doctest::Approx(9.2712253205384546e-25).epsilon(1e-12));
    CHECK(oracle::ivx(-3, 7.0) == oracle::ivx(3, 7.0));
}

TEST_CASE("scaled Bessel three-term recurrence across both regimes") {
    for (double z : {0.5, 3.0, 47.0, 290.0, 310.0, 1200.0}) {
        for (int n = 1; n <= 6; ++n) {
            const double lhs = oracle::ivx(n - 1, z) - oracle::ivx(n + 1, z);
            const double rhs = (2.0 * n / z) * oracle::ivx(n, z);
            CHECK(std::fabs(lhs - rhs) < 1e-14);
        }
    }
}

TEST_CASE("scaled Bessel mass identity ivx(0) + 2 sum ivx(n) = 1") {
    for (double z : {2.0, 20.0, 650.0}) {
        long double sum = oracle::ivx(0, z);
        for (int n = 1; n < 6000; ++n) {
            const double term = oracle::ivx(n, z);
            sum += 2.0L * term;
            if (term < 1e-19 && n > 10) break;
        }
        CHECK(static_cast<double>(sum) == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("classical heat kernel values") {
    CHECK(oracle::bessel_heat_1d(1.0, 0) == doctest::Approx(0.30850832255367104).epsilon(1e-13));
    CHECK(oracle::bessel_heat_1d(4.0, 3) == doctest::Approx(0.07919441402586030).epsilon(1e-13));
    CHECK(oracle::bessel_heat_1d(16.0, 10) == doctest::Approx(0.014668712601226620).epsilon(1e-13));
    const std::int64_t x2[2] = {1, 2};
    CHECK(oracle::bessel_heat_nd(4.0, x2, 2) ==
          doctest::Approx(0.014741744708996897).epsilon(1e-13));
}

TEST_CASE("subordinated half-power kernel quadrature") {
    CHECK(oracle::subordinated_half_kernel_1d(4.0, 0, 1e-10) ==
          doctest::Approx(0.08108100870921921).epsilon(3e-9));
    CHECK(oracle::subordinated_half_kernel_1d(4.0, 2, 1e-10) ==
          doctest::Approx(0.06336900822996862).epsilon(3e-9));
    CHECK(oracle::subordinated_half_kernel_1d(4.0, 7, 1e-10) ==
          doctest::Approx(0.019552183143230503).epsilon(3e-9));
    CHECK(oracle::subordinated_half_kernel_1d(16.0, 0, 1e-10) ==
          doctest::Approx(0.019913971121208248).epsilon(3e-9));
    CHECK(oracle::subordinated_half_kernel_1d(16.0, 7, 1e-10) ==
          doctest::Approx(0.016697054078305567).epsilon(3e-9));
}

TEST_CASE("half-power generator applied to a point mass") {
    // reference values from the symbol integral (1/pi) int_0^pi omega(xi)^s cos(x xi) dxi,
    // cross-checked against the time-side integral in extended precision;
    // the s = 1/2, x = 0 value is exactly 4/pi
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.5, 0, 1e-9) ==
          doctest::Approx(1.2732395447351627).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.5, 1, 1e-9) ==
          doctest::Approx(-0.42441318157838756).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.5, 2, 1e-9) ==
          doctest::Approx(-0.084882636315677512).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.5, 5, 1e-9) ==
          doctest::Approx(-0.012861005502375381).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.25, 0, 1e-9) ==
          doctest::Approx(1.0787052023767587).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.25, 1, 1e-9) ==
          doctest::Approx(-0.21574104047535174).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.75, 0, 1e-9) ==
          doctest::Approx(1.5737874653547950).epsilon(1e-8));
    CHECK(oracle::frac_laplacian_delta_bochner_1d(0.75, 3, 1e-9) ==
          doctest::Approx(-0.020438798251360974).epsilon(1e-8));
}

TEST_CASE("limit profile closed forms") {
    const double eta0[1] = {0.0};
    const double eta1[1] = {1.0};
    CHECK(oracle::gaussian_profile(1, eta0) ==
          doctest::Approx(0.28209479177387814).epsilon(1e-14));
    CHECK(oracle::gaussian_profile(1, eta1) ==
          doctest::Approx(0.21969564473386120).epsilon(1e-14));
    CHECK(oracle::gaussian_dprofile1_1d(1.0) ==
          doctest::Approx(-0.10984782236693060).epsilon(1e-14));
    CHECK(oracle::cauchy_profile_1d(0.0) == doctest::Approx(1.0 / kPi).epsilon(1e-15));
    CHECK(oracle::cauchy_profile_1d(3.0) ==
          doctest::Approx(1.0 / (kPi * 10.0)).epsilon(1e-15));
    const double eta2[2] = {1.0, 0.0};
    CHECK(oracle::cauchy_profile_2d(eta2) ==
          doctest::Approx(0.05626976975981913).epsilon(1e-14));
}

TEST_CASE("derivative extremes used by the sharpness comparisons") {
    // sup_eta |d/deta_1 of the s=1 profile| is attained at eta = sqrt 2
    CHECK(oracle::gaussian_dphi1_sup_1d() ==
          doctest::Approx(0.12098536225957167).epsilon(1e-10));
    CHECK(oracle::cauchy_dphi1_l1_1d() == doctest::Approx(2.0 / kPi).epsilon(1e-15));
}
