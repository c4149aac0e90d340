#include "fracheat/multiplier.hpp"

#include "fracheat/errors.hpp"
#include "fft_engine.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace fracheat {

namespace {

std::atomic<std::uint64_t> g_imag_warnings{0};

constexpr double kImagSilent = 1e-12;
constexpr double kImagError = 1e-9;

} // namespace

std::uint64_t imag_warning_count() noexcept { return g_imag_warnings.load(); }
void reset_imag_warning_count() noexcept { g_imag_warnings.store(0); }

LatticeField apply_multiplier(const LatticeField& u, const Multiplier& m,
                              const TorusGrid& grid, std::int64_t out_radius) {
    if (grid.d() != u.d()) {
        throw std::invalid_argument("multiplier grid dimension does not match the field");
    }
    if (out_radius < 0) out_radius = u.radius();

    auto result = fft::apply_multiplier_fft(u, grid.N(), out_radius, m);
    if (result.max_imag_rel > kImagError) {
        throw NonRealOutput("imaginary residue ratio " + std::to_string(result.max_imag_rel) +
                            " exceeds 1e-9; multiplier is not even-symmetric");
    }
    if (result.max_imag_rel > kImagSilent) g_imag_warnings.fetch_add(1);
    return std::move(result.box);
}

LatticeField frac_laplacian(const LatticeField& u, FracOrder s, const TorusGrid& grid,
                            std::int64_t out_radius) {
    const double sv = s.s;
    return apply_multiplier(
        u,
        [sv](const double* xi, int d) {
            return std::complex<double>(std::pow(symbol_omega(xi, d), sv), 0.0);
        },
        grid, out_radius);
}

} // namespace fracheat
