#include "fracheat/graph.hpp"

#include "fracheat/errors.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <vector>

namespace fracheat::graph {

namespace {

std::atomic<std::uint64_t> g_boundary_warnings{0};

void validate_graph(const WeightedGraph& g) {
    const int n = g.n();
    if (n < 1) throw std::invalid_argument("graph needs at least one vertex");
    if (g.w.rows() != n || g.w.cols() != n) {
        throw std::invalid_argument("weight matrix shape does not match vertex count");
    }
    for (int i = 0; i < n; ++i) {
        if (!(g.mu(i) > 0.0) || !std::isfinite(g.mu(i))) {
            throw std::invalid_argument("vertex measure must be positive and finite");
        }
        if (g.w(i, i) != 0.0) throw std::invalid_argument("self-loops are not allowed");
        for (int j = 0; j < n; ++j) {
            if (!(g.w(i, j) >= 0.0) || !std::isfinite(g.w(i, j))) {
                throw std::invalid_argument("edge weights must be finite and >= 0");
            }
            if (g.w(i, j) != g.w(j, i)) {
                throw std::invalid_argument("edge weights must be symmetric");
            }
        }
    }
}

// breadth-first reach over positive weights, optionally restricted to a mask
std::vector<char> reach(const Eigen::MatrixXd& w, int start,
                        const std::vector<char>* mask) {
    const int n = static_cast<int>(w.rows());
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> queue{start};
    seen[static_cast<std::size_t>(start)] = 1;
    while (!queue.empty()) {
        const int x = queue.back();
        queue.pop_back();
        for (int y = 0; y < n; ++y) {
            if (seen[static_cast<std::size_t>(y)] || w(x, y) <= 0.0) continue;
            if (mask && !(*mask)[static_cast<std::size_t>(y)]) continue;
            seen[static_cast<std::size_t>(y)] = 1;
            queue.push_back(y);
        }
    }
    return seen;
}

Eigen::MatrixXd unit_graph(int n) {
    return Eigen::MatrixXd::Zero(n, n);
}

// Q(A) = sum_{k>=0} (-A)^k / (k+1)! truncated after A^6, so that
// I - e^{-A} = A * Q(A) without cancellation for small A
Eigen::MatrixXd one_minus_exp_factor(const Eigen::MatrixXd& a) {
    const int n = static_cast<int>(a.rows());
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd q = id / 5040.0;
    q = id / 720.0 - a * q;
    q = id / 120.0 - a * q;
    q = id / 24.0 - a * q;
    q = id / 6.0 - a * q;
    q = id / 2.0 - a * q;
    q = id - a * q;
    return q;
}

} // namespace

int WeightedGraph::index_of(std::int64_t id) const {
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (ids[i] == id) return static_cast<int>(i);
    }
    return -1;
}

bool WeightedGraph::connected() const {
    if (n() == 0) return false;
    const auto seen = reach(w, 0, nullptr);
    return std::find(seen.begin(), seen.end(), 0) == seen.end();
}

WeightedGraph path_graph(int n) {
    if (n < 2) throw std::invalid_argument("path needs at least two vertices");
    WeightedGraph g;
    g.mu = Eigen::VectorXd::Ones(n);
    g.w = unit_graph(n);
    for (int i = 0; i + 1 < n; ++i) g.w(i, i + 1) = g.w(i + 1, i) = 1.0;
    for (int i = 0; i < n; ++i) g.ids.push_back(i);
    return g;
}

WeightedGraph cycle_graph(int n) {
    if (n < 3) throw std::invalid_argument("cycle needs at least three vertices");
    WeightedGraph g = path_graph(n);
    g.w(0, n - 1) = g.w(n - 1, 0) = 1.0;
    return g;
}

WeightedGraph grid_graph(int nx, int ny) {
    if (nx < 1 || ny < 1 || static_cast<std::int64_t>(nx) * ny < 2) {
        throw std::invalid_argument("grid needs at least two vertices");
    }
    const int n = nx * ny;
    WeightedGraph g;
    g.mu = Eigen::VectorXd::Ones(n);
    g.w = unit_graph(n);
    auto at = [ny](int i, int j) { return i * ny + j; };
    for (int i = 0; i < nx; ++i) {
        for (int j = 0; j < ny; ++j) {
            if (i + 1 < nx) g.w(at(i, j), at(i + 1, j)) = g.w(at(i + 1, j), at(i, j)) = 1.0;
            if (j + 1 < ny) g.w(at(i, j), at(i, j + 1)) = g.w(at(i, j + 1), at(i, j)) = 1.0;
        }
    }
    for (int i = 0; i < n; ++i) g.ids.push_back(i);
    return g;
}

GraphInput load_graph_json(std::istream& in) {
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("graph JSON parse failure: ") + e.what());
    }
    if (!j.contains("vertices") || !j["vertices"].is_array() || j["vertices"].empty()) {
        throw std::invalid_argument("graph JSON needs a nonempty vertices array");
    }
    GraphInput gi;
    const auto& verts = j["vertices"];
    const int n = static_cast<int>(verts.size());
    gi.g.mu = Eigen::VectorXd::Ones(n);
    gi.g.w = unit_graph(n);
    for (int i = 0; i < n; ++i) {
        const auto& v = verts[static_cast<std::size_t>(i)];
        if (!v.contains("id") || !v["id"].is_number_integer()) {
            throw std::invalid_argument("vertex entries need an integer id");
        }
        const std::int64_t id = v["id"].get<std::int64_t>();
        if (gi.g.index_of(id) >= 0) throw std::invalid_argument("duplicate vertex id");
        gi.g.ids.push_back(id);
        gi.g.mu(i) = v.value("mu", 1.0);
    }
    if (j.contains("edges")) {
        for (const auto& e : j["edges"]) {
            if (!e.contains("a") || !e.contains("b")) {
                throw std::invalid_argument("edge entries need endpoints a and b");
            }
            const int a = gi.g.index_of(e["a"].get<std::int64_t>());
            const int b = gi.g.index_of(e["b"].get<std::int64_t>());
            if (a < 0 || b < 0) throw std::invalid_argument("edge endpoint is not a vertex id");
            if (a == b) throw std::invalid_argument("self-loops are not allowed");
            if (gi.g.w(a, b) != 0.0) throw std::invalid_argument("duplicate edge");
            const double wv = e.value("w", 1.0);
            gi.g.w(a, b) = gi.g.w(b, a) = wv;
        }
    }
    if (j.contains("omega")) {
        for (const auto& id : j["omega"]) {
            const int i = gi.g.index_of(id.get<std::int64_t>());
            if (i < 0) throw std::invalid_argument("omega entry is not a vertex id");
            gi.omega.push_back(i);
        }
        std::sort(gi.omega.begin(), gi.omega.end());
        if (std::adjacent_find(gi.omega.begin(), gi.omega.end()) != gi.omega.end()) {
            throw std::invalid_argument("duplicate omega entry");
        }
    }
    validate_graph(gi.g);
    return gi;
}

GraphInput load_graph_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open graph file " + path);
    return load_graph_json(in);
}

Eigen::MatrixXd host_laplacian(const WeightedGraph& g) {
    validate_graph(g);
    const int n = g.n();
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) {
        double deg = 0.0;
        for (int y = 0; y < n; ++y) {
            deg += g.w(x, y);
            if (y != x) l(x, y) = -g.w(x, y) / g.mu(x);
        }
        l(x, x) = deg / g.mu(x);
    }
    return l;
}

Eigen::MatrixXd frac_power_spectral(const WeightedGraph& g, FracOrder s) {
    const Eigen::MatrixXd l = host_laplacian(g);
    const int n = g.n();
    const Eigen::VectorXd rt = g.mu.cwiseSqrt();
    Eigen::MatrixXd sym = rt.asDiagonal() * l * rt.cwiseInverse().asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw ToleranceUnreachable("host eigensolve did not converge");
    }
    Eigen::VectorXd lam = es.eigenvalues();
    // the kernel of L comes back at rounding scale; powering such an
    // eigenvalue would lift eps^s into the result, so snap it to zero
    const double snap = 1e-12 * std::max(1.0, lam.cwiseAbs().maxCoeff());
    for (int k = 0; k < n; ++k) {
        lam(k) = lam(k) < snap ? 0.0 : std::pow(lam(k), s.s);
    }
    const Eigen::MatrixXd mid =
        es.eigenvectors() * lam.asDiagonal() * es.eigenvectors().transpose();
    return rt.cwiseInverse().asDiagonal() * mid * rt.asDiagonal();
}

Eigen::MatrixXd frac_power_bochner(const WeightedGraph& g, FracOrder s,
                                   double quad_tol) {
    if (!(s.s > 0.0 && s.s < 1.0)) {
        throw std::invalid_argument("semigroup quadrature needs 0 < s < 1");
    }
    if (!(quad_tol > 0.0) || !std::isfinite(quad_tol)) {
        throw std::invalid_argument("quadrature tolerance must be positive");
    }
    const Eigen::MatrixXd l = host_laplacian(g);
    const int n = g.n();
    const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
    const double pref = s.s / std::tgamma(1.0 - s.s);
    const double lnorm = l.cwiseAbs().colwise().sum().maxCoeff();

    // mu-weighted projection onto constants; e^{-tL} -> p0 as t grows
    const double mu_total = g.mu.sum();
    const Eigen::MatrixXd p0 =
        Eigen::VectorXd::Ones(n) * (g.mu.transpose() / mu_total);
    const Eigen::VectorXd rt = g.mu.cwiseSqrt();
    const double kappa = std::sqrt(g.mu.maxCoeff() / g.mu.minCoeff());

    double tail_T = 2.0;
    for (;; tail_T *= 2.0) {
        const Eigen::MatrixXd e = (-tail_T * l).exp();
        const double fro =
            (rt.asDiagonal() * (e - p0) * rt.cwiseInverse().asDiagonal()).norm();
        const double bound = pref * kappa * fro * std::pow(tail_T, -s.s) / s.s;
        if (bound < quad_tol / 4.0) break;
        if (tail_T > 1.0e12) {
            throw QuadratureStalled("semigroup never settled onto its mean projection");
        }
    }

    // t = tau^alpha with alpha(1-s) = 2 straightens the t^{-s} blowup at 0
    // into a linear ramp, so the trapezoid ladder keeps its h^2 rate
    const double alpha = 2.0 / (1.0 - s.s);
    auto f_near = [&](double tau) -> Eigen::MatrixXd {
        if (tau <= 0.0) return Eigen::MatrixXd::Zero(n, n);
        const double t = std::pow(tau, alpha);
        if (t * lnorm <= 0.1) {
            // tau^{-s*alpha-1} (I - e^{-tL}) = tau L Q(tL); survives t
            // underflowing to 0 as s approaches 1
            return (alpha * tau) * (l * one_minus_exp_factor(t * l));
        }
        return (alpha * std::pow(t, -s.s - 1.0 / alpha)) * (id - (-t * l).exp());
    };
    // t = e^y on (1, T); integrand e^{-sy} (I - e^{-tL})
    const double ymax = std::log(tail_T);
    auto f_far = [&](double y) -> Eigen::MatrixXd {
        return std::exp(-s.s * y) * (id - (-std::exp(y) * l).exp());
    };

    auto trapezoid = [n](const auto& f, double a, double b, int panels) {
        const double h = (b - a) / panels;
        Eigen::MatrixXd acc = 0.5 * (f(a) + f(b));
        for (int i = 1; i < panels; ++i) acc += f(a + h * i);
        return (h * acc).eval();
    };

    int panels = 32;
    Eigen::MatrixXd est = trapezoid(f_near, 0.0, 1.0, panels) +
                          trapezoid(f_far, 0.0, ymax, panels);
    Eigen::MatrixXd rom = est;
    bool have_rom = false;
    for (;;) {
        // refine both pieces by adding midpoints of the current panels,
        // then cancel the h^2 term against the coarse trapezoid
        const double h1 = 1.0 / panels, h2 = ymax / panels;
        Eigen::MatrixXd mids = Eigen::MatrixXd::Zero(n, n);
        for (int i = 0; i < panels; ++i) {
            mids += h1 * f_near(h1 * (i + 0.5)) + h2 * f_far(h2 * (i + 0.5));
        }
        const Eigen::MatrixXd next = 0.5 * (est + mids);
        const Eigen::MatrixXd rom_next = (4.0 * next - est) / 3.0;
        const double diff =
            have_rom ? (rom_next - rom).cwiseAbs().maxCoeff() * pref
                     : std::numeric_limits<double>::infinity();
        est = next;
        rom = rom_next;
        have_rom = true;
        panels *= 2;
        if (diff < quad_tol / 4.0) break;
        if (panels > (1 << 18)) {
            throw QuadratureStalled("semigroup quadrature did not reach the requested tolerance");
        }
    }
    return pref * rom + (pref * std::pow(tail_T, -s.s) / s.s) * (id - p0);
}

std::uint64_t boundary_warning_count() noexcept { return g_boundary_warnings.load(); }
void reset_boundary_warning_count() noexcept { g_boundary_warnings.store(0); }

DirichletOperator dirichlet_operator(const WeightedGraph& g,
                                     const std::vector<int>& omega,
                                     FracOrder s) {
    validate_graph(g);
    const int n = g.n();
    std::vector<int> om = omega;
    std::sort(om.begin(), om.end());
    om.erase(std::unique(om.begin(), om.end()), om.end());
    if (om.empty()) throw std::invalid_argument("omega must be nonempty");
    if (om.front() < 0 || om.back() >= n) {
        throw std::invalid_argument("omega index out of range");
    }
    const int k = static_cast<int>(om.size());
    if (k == n) throw EmptyBoundary("omega is the whole vertex set");

    std::vector<char> mask(static_cast<std::size_t>(n), 0);
    for (int x : om) mask[static_cast<std::size_t>(x)] = 1;
    const auto seen = reach(g.w, om.front(), &mask);
    for (int x : om) {
        if (!seen[static_cast<std::size_t>(x)]) {
            throw DisconnectedOmega("omega is not connected in the induced subgraph");
        }
    }
    bool crossing = false;
    for (int x : om) {
        for (int y = 0; y < n && !crossing; ++y) {
            crossing = !mask[static_cast<std::size_t>(y)] && g.w(x, y) > 0.0;
        }
        if (crossing) break;
    }
    bool warned = false;
    if (!crossing) {
        if (s.s == 1.0) {
            throw EmptyBoundary("no edge leaves omega; the local Dirichlet condition is vacuous");
        }
        warned = true;
        g_boundary_warnings.fetch_add(1);
        std::fprintf(stderr,
                     "warning: no edge leaves omega; long-range coupling alone "
                     "enforces the exterior condition\n");
    }

    const Eigen::MatrixXd host =
        s.s == 1.0 ? host_laplacian(g) : frac_power_spectral(g, s);
    DirichletOperator op;
    op.omega = om;
    op.s = s.s;
    op.boundary_warning = warned;
    op.m = Eigen::VectorXd(k);
    op.matrix = Eigen::MatrixXd(k, k);
    for (int i = 0; i < k; ++i) {
        op.m(i) = g.mu(om[static_cast<std::size_t>(i)]);
        for (int j = 0; j < k; ++j) {
            op.matrix(i, j) = host(om[static_cast<std::size_t>(i)],
                                   om[static_cast<std::size_t>(j)]);
        }
    }
    return op;
}

SpectralData spectral_solve(const DirichletOperator& op) {
    const int k = static_cast<int>(op.matrix.rows());
    const Eigen::VectorXd rt = op.m.cwiseSqrt();
    Eigen::MatrixXd sym = rt.asDiagonal() * op.matrix * rt.cwiseInverse().asDiagonal();
    sym = 0.5 * (sym + sym.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    if (es.info() != Eigen::Success) {
        throw ToleranceUnreachable("restricted eigensolve did not converge");
    }
    SpectralData sd;
    sd.eigenvalues = es.eigenvalues();
    sd.eigenvectors = rt.cwiseInverse().asDiagonal() * es.eigenvectors();
    for (int j = 0; j < k; ++j) {
        int arg = 0;
        sd.eigenvectors.col(j).cwiseAbs().maxCoeff(&arg);
        if (sd.eigenvectors(arg, j) < 0.0) sd.eigenvectors.col(j) *= -1.0;
    }
    sd.gap = k >= 2 ? sd.eigenvalues(1) - sd.eigenvalues(0) : 0.0;
    return sd;
}

Eigen::VectorXd dirichlet_evolve(const DirichletOperator& op,
                                 const SpectralData& sd,
                                 const Eigen::VectorXd& u0, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("evolution time must be >= 0");
    if (u0.size() != op.m.size()) {
        throw std::invalid_argument("initial datum size does not match omega");
    }
    const Eigen::VectorXd coeff =
        sd.eigenvectors.transpose() * (op.m.asDiagonal() * u0);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(u0.size());
    for (int j = 0; j < coeff.size(); ++j) {
        out += std::exp(-sd.eigenvalues(j) * t) * coeff(j) * sd.eigenvectors.col(j);
    }
    return out;
}

Eigen::VectorXd dirichlet_evolve(const DirichletOperator& op,
                                 const Eigen::VectorXd& u0, double t) {
    return dirichlet_evolve(op, spectral_solve(op), u0, t);
}

FirstModeReport first_mode_report(const DirichletOperator& op,
                                  const Eigen::VectorXd& u0, double p,
                                  const std::vector<double>& times) {
    if (times.size() < 6) throw std::invalid_argument("need at least 6 time points");
    if (!(p >= 1.0)) throw std::invalid_argument("norm exponent must be >= 1");
    if (op.matrix.rows() < 2) {
        throw std::invalid_argument("first-mode report needs at least two vertices");
    }
    const SpectralData sd = spectral_solve(op);

    FirstModeReport rep;
    rep.mu1 = sd.eigenvalues(0);
    rep.mu2 = sd.eigenvalues(1);
    rep.overlap1 = sd.eigenvectors.col(0).dot(op.m.asDiagonal() * u0);

    auto weighted_norm = [&](const Eigen::VectorXd& v) {
        if (p == std::numeric_limits<double>::infinity()) {
            return v.cwiseAbs().maxCoeff();
        }
        long double acc = 0.0L;
        for (int i = 0; i < v.size(); ++i) {
            acc += static_cast<long double>(op.m(i)) *
                   std::pow(static_cast<long double>(std::fabs(v(i))), static_cast<long double>(p));
        }
        return static_cast<double>(std::pow(acc, 1.0L / static_cast<long double>(p)));
    };

    std::vector<double> vals, renorm;
    for (double t : times) {
        const Eigen::VectorXd u = dirichlet_evolve(op, sd, u0, t);
        const Eigen::VectorXd r =
            u - std::exp(-rep.mu1 * t) * rep.overlap1 * sd.eigenvectors.col(0);
        const double v = weighted_norm(r);
        vals.push_back(v);
        renorm.push_back(v * std::exp(rep.mu1 * t));
    }
    rep.raw = fit_rate(times, vals, FitScale::semilog);
    rep.renormalized = fit_rate(times, renorm, FitScale::semilog);
    return rep;
}

PositivityReport positivity_improving_check(const Eigen::MatrixXd& l,
                                            const std::vector<double>& times) {
    if (l.rows() != l.cols() || l.rows() < 1) {
        throw std::invalid_argument("generator must be square");
    }
    if (times.empty()) throw std::invalid_argument("need at least one sample time");
    const int n = static_cast<int>(l.rows());

    PositivityReport rep;
    rep.metzler = true;
    Eigen::MatrixXd pattern = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            if (l(i, j) > 1e-12) rep.metzler = false;
            if (l(i, j) < -1e-12) pattern(i, j) = 1.0;
        }
    }
    const auto seen = reach(pattern, 0, nullptr);
    rep.irreducible =
        std::find(seen.begin(), seen.end(), 0) == seen.end();

    rep.min_entry = std::numeric_limits<double>::infinity();
    for (double t : times) {
        if (!(t > 0.0)) throw std::invalid_argument("sample times must be positive");
        const Eigen::MatrixXd e = (-t * l).exp();
        rep.min_entry = std::min(rep.min_entry, e.minCoeff());
    }
    rep.positive = rep.min_entry > 0.0;
    return rep;
}

PositivityReport positivity_improving_check(const DirichletOperator& op,
                                            const std::vector<double>& times) {
    return positivity_improving_check(op.matrix, times);
}

std::string spectral_json(const DirichletOperator& op, const SpectralData& sd) {
    nlohmann::json j;
    j["s"] = op.s;
    j["omega"] = op.omega;
    j["boundary_warning"] = op.boundary_warning;
    std::vector<double> ev(sd.eigenvalues.data(),
                           sd.eigenvalues.data() + sd.eigenvalues.size());
    j["eigenvalues"] = ev;
    j["gap"] = sd.gap;
    return j.dump(2);
}

} // namespace fracheat::graph
