#include "fracheat/lattice.hpp"
#include "fracheat/errors.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace fracheat {

FracOrder::FracOrder(double s_) : s(s_) {
    if (!(s > 0.0) || s > 1.0) {
        throw std::invalid_argument("fractional order s must lie in (0, 1], got " +
                                    std::to_string(s_));
    }
}

double symbol_omega(const double* xi, int d) {
    double acc = 0.0;
    for (int j = 0; j < d; ++j) {
        double h = std::sin(0.5 * xi[j]);
        acc += h * h;
    }
    return 4.0 * acc;
}

TorusGrid::TorusGrid(int d, std::int64_t N) : d_(d), N_(N) {
    if (d < 1 || d > 3) throw std::invalid_argument("torus grid dimension must be 1, 2 or 3");
    if (N < 4 || N % 2 != 0) {
        throw std::invalid_argument("torus grid needs an even point count >= 4, got " +
                                    std::to_string(N));
    }
}

double TorusGrid::node(std::int64_t k) const noexcept {
    const double pi = 3.14159265358979323846;
    return 2.0 * pi * static_cast<double>(k) / static_cast<double>(N_) - pi;
}

std::int64_t TorusGrid::points() const noexcept {
    std::int64_t p = 1;
    for (int j = 0; j < d_; ++j) p *= N_;
    return p;
}

namespace {

std::int64_t checked_box_size(int d, std::int64_t L) {
    if (d < 1 || d > 3) throw std::invalid_argument("field dimension must be 1, 2 or 3");
    if (L < 0) throw std::invalid_argument("box radius must be >= 0");
    const std::int64_t side = 2 * L + 1;
    // guard against 64-bit overflow before the memory budget can see the request
    if (d >= 2 && side > (std::int64_t(1) << 31)) {
        throw BoxOverflow("box side " + std::to_string(side) + " too large for d=" +
                          std::to_string(d));
    }
    std::int64_t n = 1;
    for (int j = 0; j < d; ++j) n *= side;
    return n;
}

} // namespace

LatticeField::LatticeField(int d, std::int64_t L)
    : d_(d),
      L_(L),
      resv_(MemoryBudget::instance().reserve(
          static_cast<std::size_t>(checked_box_size(d, L)) * sizeof(double), "lattice box")),
      v_(static_cast<std::size_t>(checked_box_size(d, L)), 0.0) {}

LatticeField LatticeField::delta(int d, std::int64_t L) {
    LatticeField f(d, L);
    f.at(0, 0, 0) = 1.0;
    return f;
}

std::int64_t LatticeField::flat_index(const std::int64_t* x) const noexcept {
    const std::int64_t side = 2 * L_ + 1;
    std::int64_t idx = 0;
    for (int j = 0; j < d_; ++j) idx = idx * side + (x[j] + L_);
    return idx;
}

double& LatticeField::at(std::int64_t x0, std::int64_t x1, std::int64_t x2) {
    const std::int64_t x[3] = {x0, x1, x2};
    for (int j = 0; j < 3; ++j) {
        if (j < d_ ? (x[j] < -L_ || x[j] > L_) : x[j] != 0) {
            throw std::out_of_range("lattice field index outside box of radius " +
                                    std::to_string(L_));
        }
    }
    return v_[static_cast<std::size_t>(flat_index(x))];
}

double LatticeField::at(std::int64_t x0, std::int64_t x1, std::int64_t x2) const {
    return const_cast<LatticeField*>(this)->at(x0, x1, x2);
}

double LatticeField::mass() const {
    long double acc = 0.0L;
    for (double x : v_) acc += x;
    return static_cast<double>(acc);
}

double LatticeField::sup_norm() const {
    double m = 0.0;
    for (double x : v_) m = std::max(m, std::fabs(x));
    return m;
}

double LatticeField::norm(double p) const {
    if (p == std::numeric_limits<double>::infinity()) return sup_norm();
    if (!(p >= 1.0)) throw std::invalid_argument("lp norm needs p >= 1");
    long double acc = 0.0L;
    if (p == 1.0) {
        for (double x : v_) acc += std::fabs(x);
        return static_cast<double>(acc);
    }
    if (p == 2.0) {
        for (double x : v_) acc += static_cast<long double>(x) * x;
        return static_cast<double>(std::sqrt(static_cast<double>(acc)));
    }
    for (double x : v_) acc += std::pow(std::fabs(x), p);
    return std::pow(static_cast<double>(acc), 1.0 / p);
}

double LatticeField::abs_first_moment() const {
    long double acc = 0.0L;
    for_each([&](const std::int64_t* x, double v) {
        if (v == 0.0) return;
        double r2 = 0.0;
        for (int j = 0; j < d_; ++j) {
            r2 += static_cast<double>(x[j]) * static_cast<double>(x[j]);
        }
        acc += std::sqrt(r2) * std::fabs(v);
    });
    return static_cast<double>(acc);
}

Moments moments(const LatticeField& u) { return {u.mass(), u.abs_first_moment()}; }

} // namespace fracheat
