#pragma once

#include "fracheat/memory.hpp"

#include <array>
#include <cstdint>
#include <vector>

namespace fracheat {

// Fractional order s of the semigroup generator -(-Laplacian)^s.
// The admissible range is 0 < s <= 1; s = 1 is the classical heat flow.
struct FracOrder {
    double s;
    explicit FracOrder(double s_);
    bool classical() const noexcept { return s == 1.0; }
};

// Fourier symbol of the (negated) lattice Laplacian on Z^d:
//   omega(xi) = 4 * sum_j sin^2(xi_j / 2),  xi in [-pi, pi]^d.
// Range is [0, 4d]; omega(0) = 0.
double symbol_omega(const double* xi, int d);

// Uniform frequency grid on the torus [-pi, pi)^d with N points per axis,
// nodes xi_k = 2*pi*k/N - pi. N must be even and >= 4 so that synthesis on a
// box of radius L can require N >= 2L+1 with symmetric coverage.
class TorusGrid {
public:
    TorusGrid(int d, std::int64_t N);
    int d() const noexcept { return d_; }
    std::int64_t N() const noexcept { return N_; }
    double node(std::int64_t k) const noexcept;
    std::int64_t points() const noexcept; // N^d

private:
    int d_;
    std::int64_t N_;
};

// Real-valued function on the centered box [-L, L]^d of Z^d, d in {1,2,3}.
// Storage is dense row-major with the last coordinate fastest; large boxes
// are charged against the process memory budget (BoxOverflow on exhaustion).
class LatticeField {
public:
    LatticeField(int d, std::int64_t L);

    static LatticeField delta(int d, std::int64_t L); // point mass at the origin

    int d() const noexcept { return d_; }
    std::int64_t radius() const noexcept { return L_; }
    std::int64_t side() const noexcept { return 2 * L_ + 1; }
    std::int64_t size() const noexcept { return static_cast<std::int64_t>(v_.size()); }

    double* data() noexcept { return v_.data(); }
    const double* data() const noexcept { return v_.data(); }

    // Coordinates must satisfy |x_j| <= L; trailing coordinates beyond d are 0.
    double& at(std::int64_t x0, std::int64_t x1 = 0, std::int64_t x2 = 0);
    double at(std::int64_t x0, std::int64_t x1 = 0, std::int64_t x2 = 0) const;

    std::int64_t flat_index(const std::int64_t* x) const noexcept;

    // Visits every site as f(x_ptr, value); x_ptr points at d coordinates.
    template <typename F>
    void for_each(F&& f) const {
        std::array<std::int64_t, 3> x{-L_, d_ > 1 ? -L_ : 0, d_ > 2 ? -L_ : 0};
        const std::int64_t n = size();
        for (std::int64_t i = 0; i < n; ++i) {
            f(x.data(), v_[static_cast<std::size_t>(i)]);
            // odometer increment, last coordinate fastest
            for (int j = d_ - 1; j >= 0; --j) {
                if (x[static_cast<std::size_t>(j)] < L_) {
                    ++x[static_cast<std::size_t>(j)];
                    break;
                }
                x[static_cast<std::size_t>(j)] = -L_;
            }
        }
    }

    double mass() const;             // sum of all values
    double norm(double p) const;     // lp norm, p in [1, infinity]
    double sup_norm() const;
    double abs_first_moment() const; // sum |x|_2 |u(x)|

private:
    int d_;
    std::int64_t L_;
    MemoryBudget::Reservation resv_;
    std::vector<double> v_;
};

// Conserved quantities of the flow: total mass M = sum u(x) and the
// absolute first moment N1 = sum |x|_2 |u(x)|.
struct Moments {
    double mass;
    double first_moment;
};
Moments moments(const LatticeField& u);

} // namespace fracheat
