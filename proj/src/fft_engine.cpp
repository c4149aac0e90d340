#include "fft_engine.hpp"

#include "fracheat/errors.hpp"
#include "fracheat/memory.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>

namespace fracheat::fft {

namespace {

constexpr double kPi = 3.14159265358979323846;

// FFTW's planner is not thread-safe; executions on distinct plans are.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct PlanGuard {
    fftw_plan p = nullptr;
    ~PlanGuard() {
        if (p != nullptr) {
            std::lock_guard<std::mutex> lk(planner_mutex());
            fftw_destroy_plan(p);
        }
    }
};

struct Buffer {
    double* p = nullptr;
    std::size_t doubles = 0;
    MemoryBudget::Reservation resv;

    Buffer(std::size_t count, const char* what)
        : doubles(count),
          resv(MemoryBudget::instance().reserve(count * sizeof(double), what)) {
        p = static_cast<double*>(fftw_malloc(count * sizeof(double)));
        if (p == nullptr) throw BoxOverflow(std::string(what) + ": allocation failed");
        std::memset(p, 0, count * sizeof(double));
    }
    Buffer(const Buffer&) = delete;
    Buffer& operator=(const Buffer&) = delete;
    ~Buffer() {
        if (p != nullptr) fftw_free(p);
    }
};

std::int64_t ipow(std::int64_t b, int e) {
    std::int64_t r = 1;
    for (int i = 0; i < e; ++i) r *= b;
    return r;
}

void check_grid(int d, std::int64_t N) {
    if (d < 1 || d > 3) throw std::invalid_argument("transform dimension must be 1, 2 or 3");
    if (N < 4 || N % 2 != 0) throw GridTooSmall("transform grid must be even and >= 4");
    // guard element-count arithmetic before the memory budget sees the request
    double total = std::pow(static_cast<double>(N), d);
    if (total > 1e12) throw BoxOverflow("transform grid of " + std::to_string(N) + "^" +
                                        std::to_string(d) + " points is out of range");
}

} // namespace

std::int64_t next_smooth_even(std::int64_t n) {
    if (n < 4) return 4;
    std::int64_t c = n + (n % 2);
    for (;; c += 2) {
        std::int64_t m = c;
        while (m % 2 == 0) m /= 2;
        while (m % 3 == 0) m /= 3;
        while (m % 5 == 0) m /= 5;
        if (m == 1) return c;
    }
}

std::size_t r2c_workspace_bytes(int d, std::int64_t N) {
    std::int64_t rows = ipow(N, d - 1);
    return static_cast<std::size_t>(rows) * static_cast<std::size_t>(2 * (N / 2 + 1)) *
           sizeof(double);
}

EvenSynthesis synthesize_even_symbol(int d, std::int64_t N, std::int64_t L,
                                     const std::function<double(double)>& f_of_omega) {
    check_grid(d, N);
    if (L < 0 || 2 * L + 2 > N) {
        throw GridTooSmall("grid N=" + std::to_string(N) + " cannot hold a box of radius " +
                           std::to_string(L));
    }

    const std::int64_t half = N / 2;
    const std::int64_t cl = half + 1;       // complex entries per last-axis row
    const std::int64_t phys = 2 * cl;       // padded doubles per last-axis row
    const std::int64_t rows = ipow(N, d - 1);

    Buffer buf(static_cast<std::size_t>(rows * phys), "kernel transform workspace");
    double* in = buf.p;

    // Per-axis symbol parts w(k) = 4 sin^2(pi k / N). Coordinate evenness lets
    // us evaluate the symbol on the corner k_j <= N/2 only and mirror the rest.
    if (d == 1) {
        for (std::int64_t k = 0; k <= half; ++k) {
            double sn = std::sin(kPi * static_cast<double>(k) / static_cast<double>(N));
            in[k] = f_of_omega(4.0 * sn * sn);
        }
        for (std::int64_t k = half + 1; k < N; ++k) in[k] = in[N - k];
    } else {
        std::vector<double> w(static_cast<std::size_t>(half + 1));
        for (std::int64_t k = 0; k <= half; ++k) {
            double sn = std::sin(kPi * static_cast<double>(k) / static_cast<double>(N));
            w[static_cast<std::size_t>(k)] = 4.0 * sn * sn;
        }
        if (d == 2) {
            for (std::int64_t k1 = 0; k1 <= half; ++k1) {
                double* row = in + k1 * phys;
                double w1 = w[static_cast<std::size_t>(k1)];
                for (std::int64_t k2 = 0; k2 <= half; ++k2) {
                    row[k2] = f_of_omega(w1 + w[static_cast<std::size_t>(k2)]);
                }
                for (std::int64_t k2 = half + 1; k2 < N; ++k2) row[k2] = row[N - k2];
            }
            for (std::int64_t k1 = half + 1; k1 < N; ++k1) {
                std::memcpy(in + k1 * phys, in + (N - k1) * phys,
                            static_cast<std::size_t>(phys) * sizeof(double));
            }
        } else {
            for (std::int64_t k1 = 0; k1 <= half; ++k1) {
                double w1 = w[static_cast<std::size_t>(k1)];
                for (std::int64_t k2 = 0; k2 <= half; ++k2) {
                    double* row = in + (k1 * N + k2) * phys;
                    double w12 = w1 + w[static_cast<std::size_t>(k2)];
                    for (std::int64_t k3 = 0; k3 <= half; ++k3) {
                        row[k3] = f_of_omega(w12 + w[static_cast<std::size_t>(k3)]);
                    }
                    for (std::int64_t k3 = half + 1; k3 < N; ++k3) row[k3] = row[N - k3];
                }
                for (std::int64_t k2 = half + 1; k2 < N; ++k2) {
                    std::memcpy(in + (k1 * N + k2) * phys, in + (k1 * N + (N - k2)) * phys,
                                static_cast<std::size_t>(phys) * sizeof(double));
                }
            }
            for (std::int64_t k1 = half + 1; k1 < N; ++k1) {
                std::memcpy(in + k1 * N * phys, in + (N - k1) * N * phys,
                            static_cast<std::size_t>(N * phys) * sizeof(double));
            }
        }
    }

    PlanGuard plan;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        int n[3] = {static_cast<int>(N), static_cast<int>(N), static_cast<int>(N)};
        plan.p = fftw_plan_dft_r2c(d, n, in, reinterpret_cast<fftw_complex*>(in),
                                   FFTW_ESTIMATE);
    }
    if (plan.p == nullptr) throw BoxOverflow("transform planning failed");
    fftw_execute(plan.p);

    const fftw_complex* c = reinterpret_cast<const fftw_complex*>(in);
    const double inv = 1.0 / std::pow(static_cast<double>(N), d);

    // Full-period sum and imaginary residue. The last axis carries only half
    // the period; interior entries stand for a coordinate and its mirror.
    long double acc = 0.0L;
    double max_im = 0.0;
    for (std::int64_t r = 0; r < rows; ++r) {
        const fftw_complex* row = c + r * cl;
        acc += row[0][0];
        acc += row[half][0];
        long double mid = 0.0L;
        for (std::int64_t i = 1; i < half; ++i) {
            mid += row[i][0];
            max_im = std::max(max_im, std::fabs(row[i][1]));
        }
        max_im = std::max({max_im, std::fabs(row[0][1]), std::fabs(row[half][1])});
        acc += 2.0L * mid;
    }

    EvenSynthesis out{LatticeField(d, L), static_cast<double>(acc) * inv, max_im * inv};

    double* dst = out.box.data();
    const std::int64_t side = 2 * L + 1;
    if (d == 1) {
        for (std::int64_t x = -L; x <= L; ++x) {
            dst[x + L] = c[std::llabs(x)][0] * inv;
        }
    } else if (d == 2) {
        for (std::int64_t x1 = -L; x1 <= L; ++x1) {
            std::int64_t i1 = x1 >= 0 ? x1 : N + x1;
            double* drow = dst + (x1 + L) * side;
            const fftw_complex* crow = c + i1 * cl;
            for (std::int64_t x2 = -L; x2 <= L; ++x2) {
                drow[x2 + L] = crow[std::llabs(x2)][0] * inv;
            }
        }
    } else {
        for (std::int64_t x1 = -L; x1 <= L; ++x1) {
            std::int64_t i1 = x1 >= 0 ? x1 : N + x1;
            for (std::int64_t x2 = -L; x2 <= L; ++x2) {
                std::int64_t i2 = x2 >= 0 ? x2 : N + x2;
                double* drow = dst + ((x1 + L) * side + (x2 + L)) * side;
                const fftw_complex* crow = c + (i1 * N + i2) * cl;
                for (std::int64_t x3 = -L; x3 <= L; ++x3) {
                    drow[x3 + L] = crow[std::llabs(x3)][0] * inv;
                }
            }
        }
    }
    return out;
}

MultiplierResult apply_multiplier_fft(
    const LatticeField& u, std::int64_t N, std::int64_t out_radius,
    const std::function<std::complex<double>(const double*, int)>& m) {
    const int d = u.d();
    check_grid(d, N);
    if (2 * u.radius() + 1 > N) {
        throw GridTooSmall("grid N=" + std::to_string(N) + " is smaller than the input box");
    }
    if (out_radius < 0 || 2 * out_radius + 1 > N) {
        throw GridTooSmall("grid N=" + std::to_string(N) +
                           " cannot hold the requested output box");
    }

    const std::int64_t total = ipow(N, d);
    Buffer buf(static_cast<std::size_t>(2 * total), "multiplier workspace");
    fftw_complex* z = reinterpret_cast<fftw_complex*>(buf.p);

    // periodic embedding of the input box
    const std::int64_t Lu = u.radius();
    const double* src = u.data();
    const std::int64_t uside = 2 * Lu + 1;
    {
        std::int64_t i = 0;
        std::int64_t x[3] = {-Lu, d > 1 ? -Lu : 0, d > 2 ? -Lu : 0};
        const std::int64_t n = u.size();
        for (std::int64_t k = 0; k < n; ++k) {
            std::int64_t idx = 0;
            for (int j = 0; j < d; ++j) {
                std::int64_t ij = x[j] >= 0 ? x[j] : N + x[j];
                idx = idx * N + ij;
            }
            z[idx][0] = src[i++];
            for (int j = d - 1; j >= 0; --j) {
                if (x[j] < Lu) {
                    ++x[j];
                    break;
                }
                x[j] = -Lu;
            }
        }
        (void)uside;
    }

    PlanGuard fwd;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        int n[3] = {static_cast<int>(N), static_cast<int>(N), static_cast<int>(N)};
        fwd.p = fftw_plan_dft(d, n, z, z, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    if (fwd.p == nullptr) throw BoxOverflow("transform planning failed");
    fftw_execute(fwd.p);

    // multiply by the symbol at nodes reduced to [-pi, pi)
    {
        const std::int64_t half = N / 2;
        double xi[3] = {0, 0, 0};
        std::int64_t k[3] = {0, 0, 0};
        for (std::int64_t i = 0; i < total; ++i) {
            for (int j = 0; j < d; ++j) {
                double v = 2.0 * kPi * static_cast<double>(k[j]) / static_cast<double>(N);
                xi[j] = k[j] >= half ? v - 2.0 * kPi : v;
            }
            std::complex<double> mv = m(xi, d);
            double re = z[i][0], im = z[i][1];
            z[i][0] = re * mv.real() - im * mv.imag();
            z[i][1] = re * mv.imag() + im * mv.real();
            for (int j = d - 1; j >= 0; --j) {
                if (k[j] < N - 1) {
                    ++k[j];
                    break;
                }
                k[j] = 0;
            }
        }
    }

    PlanGuard bwd;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        int n[3] = {static_cast<int>(N), static_cast<int>(N), static_cast<int>(N)};
        bwd.p = fftw_plan_dft(d, n, z, z, FFTW_BACKWARD, FFTW_ESTIMATE);
    }
    if (bwd.p == nullptr) throw BoxOverflow("transform planning failed");
    fftw_execute(bwd.p);

    const double inv = 1.0 / static_cast<double>(total);
    MultiplierResult out{LatticeField(d, out_radius), 0.0};
    double* dst = out.box.data();
    double max_re = 0.0, max_im = 0.0;
    {
        std::int64_t i = 0;
        std::int64_t x[3] = {-out_radius, d > 1 ? -out_radius : 0, d > 2 ? -out_radius : 0};
        const std::int64_t n = out.box.size();
        for (std::int64_t q = 0; q < n; ++q) {
            std::int64_t idx = 0;
            for (int j = 0; j < d; ++j) {
                std::int64_t ij = x[j] >= 0 ? x[j] : N + x[j];
                idx = idx * N + ij;
            }
            double re = z[idx][0] * inv, im = z[idx][1] * inv;
            dst[i++] = re;
            max_re = std::max(max_re, std::fabs(re));
            max_im = std::max(max_im, std::fabs(im));
            for (int j = d - 1; j >= 0; --j) {
                if (x[j] < out_radius) {
                    ++x[j];
                    break;
                }
                x[j] = -out_radius;
            }
        }
    }
    out.max_imag_rel = max_im / std::max(max_re, 1e-300);
    return out;
}

LatticeField convolve_linear(const LatticeField& a, const LatticeField& b,
                             std::int64_t out_radius) {
    const int d = a.d();
    if (b.d() != d) throw std::invalid_argument("convolution operands must share dimension");
    const std::int64_t La = a.radius(), Lb = b.radius();
    if (out_radius < 0 || out_radius > La + Lb) {
        throw std::invalid_argument("convolution output radius must lie in [0, La+Lb]");
    }
    const std::int64_t N = next_smooth_even(2 * (La + Lb) + 2);
    check_grid(d, N);

    const std::int64_t half = N / 2;
    const std::int64_t cl = half + 1;
    const std::int64_t phys = 2 * cl;
    const std::int64_t rows = ipow(N, d - 1);
    const std::size_t count = static_cast<std::size_t>(rows * phys);

    Buffer bufA(count, "convolution workspace");
    Buffer bufB(count, "convolution workspace");

    auto embed = [&](const LatticeField& f, double* dstbuf) {
        const std::int64_t Lf = f.radius();
        const double* src = f.data();
        std::int64_t i = 0;
        std::int64_t x[3] = {-Lf, d > 1 ? -Lf : 0, d > 2 ? -Lf : 0};
        const std::int64_t n = f.size();
        for (std::int64_t q = 0; q < n; ++q) {
            std::int64_t idx = 0;
            for (int j = 0; j < d; ++j) {
                std::int64_t ij = x[j] >= 0 ? x[j] : N + x[j];
                idx = j + 1 == d ? idx * phys + ij : idx * N + ij;
            }
            dstbuf[idx] = src[i++];
            for (int j = d - 1; j >= 0; --j) {
                if (x[j] < Lf) {
                    ++x[j];
                    break;
                }
                x[j] = -Lf;
            }
        }
    };
    embed(a, bufA.p);
    embed(b, bufB.p);

    int n[3] = {static_cast<int>(N), static_cast<int>(N), static_cast<int>(N)};
    PlanGuard pa, pb, pc;
    {
        std::lock_guard<std::mutex> lk(planner_mutex());
        pa.p = fftw_plan_dft_r2c(d, n, bufA.p, reinterpret_cast<fftw_complex*>(bufA.p),
                                 FFTW_ESTIMATE);
        pb.p = fftw_plan_dft_r2c(d, n, bufB.p, reinterpret_cast<fftw_complex*>(bufB.p),
                                 FFTW_ESTIMATE);
        pc.p = fftw_plan_dft_c2r(d, n, reinterpret_cast<fftw_complex*>(bufA.p), bufA.p,
                                 FFTW_ESTIMATE);
    }
    if (pa.p == nullptr || pb.p == nullptr || pc.p == nullptr) {
        throw BoxOverflow("transform planning failed");
    }
    fftw_execute(pa.p);
    fftw_execute(pb.p);

    const double inv = 1.0 / std::pow(static_cast<double>(N), d);
    fftw_complex* za = reinterpret_cast<fftw_complex*>(bufA.p);
    const fftw_complex* zb = reinterpret_cast<const fftw_complex*>(bufB.p);
    const std::int64_t ztotal = rows * cl;
    for (std::int64_t i = 0; i < ztotal; ++i) {
        double re = za[i][0] * zb[i][0] - za[i][1] * zb[i][1];
        double im = za[i][0] * zb[i][1] + za[i][1] * zb[i][0];
        za[i][0] = re * inv;
        za[i][1] = im * inv;
    }
    fftw_execute(pc.p);

    LatticeField out(d, out_radius);
    double* dst = out.data();
    std::int64_t i = 0;
    std::int64_t x[3] = {-out_radius, d > 1 ? -out_radius : 0, d > 2 ? -out_radius : 0};
    const std::int64_t total_out = out.size();
    for (std::int64_t q = 0; q < total_out; ++q) {
        std::int64_t idx = 0;
        for (int j = 0; j < d; ++j) {
            std::int64_t ij = x[j] >= 0 ? x[j] : N + x[j];
            idx = j + 1 == d ? idx * phys + ij : idx * N + ij;
        }
        dst[i++] = bufA.p[idx];
        for (int j = d - 1; j >= 0; --j) {
            if (x[j] < out_radius) {
                ++x[j];
                break;
            }
            x[j] = -out_radius;
        }
    }
    return out;
}

} // namespace fracheat::fft
