#pragma once

// Finite weighted graphs: host Laplacian, fractional powers by spectral
// calculus and by heat-semigroup quadrature (two independent routes), the
// restricted Dirichlet operator on a vertex subset, its spectral data,
// first-mode decay reports, and entrywise positivity of the evolution.

#include "fracheat/fit.hpp"
#include "fracheat/lattice.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace fracheat::graph {

struct WeightedGraph {
    Eigen::VectorXd mu;             // vertex measure, entrywise > 0
    Eigen::MatrixXd w;              // symmetric weights, zero diagonal, >= 0
    std::vector<std::int64_t> ids;  // external labels, ids[i] names vertex i

    int n() const { return static_cast<int>(mu.size()); }
    int index_of(std::int64_t id) const;  // -1 when absent
    bool connected() const;
};

WeightedGraph path_graph(int n);
WeightedGraph cycle_graph(int n);
WeightedGraph grid_graph(int nx, int ny);

// {"vertices":[{"id","mu"}], "edges":[{"a","b","w"}], "omega":[ids]}
struct GraphInput {
    WeightedGraph g;
    std::vector<int> omega;  // internal indices, may be empty
};
GraphInput load_graph_json(std::istream& in);
GraphInput load_graph_json(const std::string& path);

// Negative generator -Delta: (Lu)(x) = (1/mu(x)) sum_y w_xy (u(x) - u(y)).
// Self-adjoint in l2(V,mu), annihilates constants.
Eigen::MatrixXd host_laplacian(const WeightedGraph& g);

// Entrywise s-power of the host spectrum in the mu-weighted eigenbasis.
Eigen::MatrixXd frac_power_spectral(const WeightedGraph& g, FracOrder s);

// Same operator from the semigroup integral
//   L^s = (s / Gamma(1-s)) int_0^inf (I - e^{-tL}) t^{-1-s} dt,
// computed without any eigendecomposition: power-graded nodes on (0,1),
// log-spaced nodes on (1,T), analytic tail beyond T.  Requires 0 < s < 1.
Eigen::MatrixXd frac_power_bochner(const WeightedGraph& g, FracOrder s,
                                   double quad_tol);

// Number of empty-boundary warnings issued so far (s < 1 only).
std::uint64_t boundary_warning_count() noexcept;
void reset_boundary_warning_count() noexcept;

struct DirichletOperator {
    std::vector<int> omega;  // host indices, ascending
    Eigen::VectorXd m;       // measure restricted to omega
    Eigen::MatrixXd matrix;  // self-adjoint in l2(omega, m), positive definite
    double s = 1.0;
    bool boundary_warning = false;
};

// s = 1: the Dirichlet stencil (principal submatrix of the host Laplacian,
// boundary-edge degrees kept on the diagonal).  s < 1: principal submatrix
// of frac_power_spectral.  omega must be nonempty, induced-connected, and
// proper; a missing exterior boundary is an error at s = 1 and a warning
// otherwise (long-range weights still couple omega to the rest of a
// connected host).
DirichletOperator dirichlet_operator(const WeightedGraph& g,
                                     const std::vector<int>& omega,
                                     FracOrder s);

struct SpectralData {
    Eigen::VectorXd eigenvalues;   // ascending
    Eigen::MatrixXd eigenvectors;  // columns, orthonormal in l2(omega, m)
    double gap = 0.0;              // eigenvalues[1] - eigenvalues[0]
};

// Dense symmetric eigensolve of diag(sqrt m) A diag(1/sqrt m); eigenvectors
// mapped back to the weighted space, each flipped so its largest-magnitude
// entry is positive.
SpectralData spectral_solve(const DirichletOperator& op);

Eigen::VectorXd dirichlet_evolve(const DirichletOperator& op,
                                 const SpectralData& sd,
                                 const Eigen::VectorXd& u0, double t);
Eigen::VectorXd dirichlet_evolve(const DirichletOperator& op,
                                 const Eigen::VectorXd& u0, double t);

struct FirstModeReport {
    double mu1 = 0.0;
    double mu2 = 0.0;
    double overlap1 = 0.0;   // <u0, psi1>_m
    RateReport raw;          // semilog fit of the first-mode residual, slope ~ -mu2
    RateReport renormalized; // residual scaled by e^{mu1 t}, slope ~ -(mu2 - mu1)
};

// Residual r(t) = u(t) - e^{-mu1 t} <u0,psi1> psi1 in the weighted l^p norm
// at the given times (at least 6, increasing).
FirstModeReport first_mode_report(const DirichletOperator& op,
                                  const Eigen::VectorXd& u0, double p,
                                  const std::vector<double>& times);

struct PositivityReport {
    bool positive = false;    // every entry of e^{-tL} > 0 at every sample
    double min_entry = 0.0;   // smallest entry seen across samples
    bool metzler = false;     // off-diagonals of L all <= 0
    bool irreducible = false; // strict-negativity pattern connects omega
};

PositivityReport positivity_improving_check(const Eigen::MatrixXd& L,
                                            const std::vector<double>& times);
PositivityReport positivity_improving_check(const DirichletOperator& op,
                                            const std::vector<double>& times);

std::string spectral_json(const DirichletOperator& op, const SpectralData& sd);

} // namespace fracheat::graph
