#pragma once

// Finite weighted digraphs: normalized Laplacian construction from edge
// lists, ergodicity testing, and good-Laplacian Bernstein matrix functions
// g(L) = integral (I - exp(-tau L)) nu(dtau) evaluated by quadrature over
// matrix exponentials.

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "stml/laplacian.hpp"
#include "stml/quadrature.hpp"

namespace stml {

/// Dense Laplacian of a finite weighted digraph.  `weights` is the
/// nonnegative matrix Omega with zero diagonal; the normalized Laplacian has
/// unit diagonal: L_ij = delta_ij - Omega_ij / k_i^out.
struct DigraphLaplacian {
    Eigen::MatrixXd weights;
    Eigen::VectorXd out_degrees;

    int n_nodes() const { return static_cast<int>(weights.rows()); }

    Eigen::MatrixXd matrix() const {
        int n = n_nodes();
        Eigen::MatrixXd L = Eigen::MatrixXd::Identity(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (i != j) L(i, j) = -weights(i, j) / out_degrees(i);
        return L;
    }

    /// one-step transition matrix W = I - L
    Eigen::MatrixXd transition() const {
        return Eigen::MatrixXd::Identity(n_nodes(), n_nodes()) - matrix();
    }
};

inline DigraphLaplacian digraph_from_weights(const Eigen::MatrixXd& omega) {
    if (omega.rows() != omega.cols())
        throw std::invalid_argument("digraph: weight matrix must be square");
    int n = static_cast<int>(omega.rows());
    for (int i = 0; i < n; ++i) {
        if (omega(i, i) != 0.0)
            throw std::invalid_argument("digraph: self-loops are not allowed");
        for (int j = 0; j < n; ++j)
            if (omega(i, j) < 0.0)
                throw std::invalid_argument("digraph: negative edge weight");
    }
    DigraphLaplacian d;
    d.weights = omega;
    d.out_degrees = omega.rowwise().sum();
    for (int i = 0; i < n; ++i)
        if (!(d.out_degrees(i) > 0.0))
            throw std::invalid_argument("digraph: node " + std::to_string(i) +
                                        " has zero out-degree");
    return d;
}

/// Whitespace-separated edge list `i j weight` (0-indexed), one edge per
/// line; blank lines and lines starting with '#' are skipped.
inline DigraphLaplacian digraph_from_edge_list(std::istream& in) {
    struct Edge {
        int i, j;
        double w;
    };
    std::vector<Edge> edges;
    int n = 0;
    std::string line;
    while (std::getline(in, line)) {
        auto pos = line.find_first_not_of(" \t");
        if (pos == std::string::npos || line[pos] == '#') continue;
        std::istringstream ls(line);
        Edge e{};
        if (!(ls >> e.i >> e.j >> e.w))
            throw std::invalid_argument("digraph: malformed edge line: " + line);
        if (e.i < 0 || e.j < 0)
            throw std::invalid_argument("digraph: negative node index");
        if (e.i == e.j) throw std::invalid_argument("digraph: self-loops are not allowed");
        if (e.w < 0.0) throw std::invalid_argument("digraph: negative edge weight");
        n = std::max(n, std::max(e.i, e.j) + 1);
        edges.push_back(e);
    }
    if (n == 0) throw std::invalid_argument("digraph: empty edge list");
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    for (const auto& e : edges) omega(e.i, e.j) += e.w;
    return digraph_from_weights(omega);
}

inline DigraphLaplacian digraph_from_edge_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("digraph: cannot open " + path);
    return digraph_from_edge_list(f);
}

/// Ergodicity (strong connectivity with aperiodicity in the matrix-power
/// sense): some power n <= n_max of Lambda*I - L is entrywise positive,
/// with Lambda = 1 + max_i sum_j |L_ij| so the base matrix is nonnegative.
inline bool check_ergodic(const DigraphLaplacian& d, int n_max = 64) {
    Eigen::MatrixXd L = d.matrix();
    int n = d.n_nodes();
    double lambda = 1.0 + L.cwiseAbs().rowwise().sum().maxCoeff();
    Eigen::MatrixXd B = lambda * Eigen::MatrixXd::Identity(n, n) - L;
    using BoolMat = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;
    BoolMat adj = (B.array() > 0.0);
    BoolMat reach = adj;
    for (int step = 1; step <= n_max; ++step) {
        if (reach.all()) return true;
        BoolMat next = BoolMat::Constant(n, n, false);
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k)
                if (reach(i, k))
                    for (int j = 0; j < n; ++j)
                        if (adj(k, j)) next(i, j) = true;
        if ((next.array() == reach.array()).all()) return next.all();
        reach = next;
    }
    return reach.all();
}

/// Good-Laplacian checks for a dense matrix: zero row sums, positive
/// diagonal, non-positive off-diagonal entries.
inline GoodLaplacianReport check_good_laplacian(const Eigen::MatrixXd& M,
                                                double tol = 1e-9) {
    GoodLaplacianReport r;
    r.tail_included = true;  // finite matrix: nothing truncated
    r.row_sum_residual = M.rowwise().sum().cwiseAbs().maxCoeff();
    r.diagonal = M.diagonal().minCoeff();
    double max_off = -std::numeric_limits<double>::infinity();
    for (int i = 0; i < M.rows(); ++i)
        for (int j = 0; j < M.cols(); ++j)
            if (i != j) max_off = std::max(max_off, M(i, j));
    r.max_offdiagonal = max_off;
    r.row_sum_ok = r.row_sum_residual < tol;
    r.diagonal_ok = r.diagonal > 0.0;
    r.offdiag_ok = max_off <= 1e-12;
    return r;
}



/**
 * Bernstein matrix function g(L) = integral (I - exp(-tau L)) nu(dtau).
 *
 * Three regions:
 *  - (0, tau0]: I - exp(-tau L) is replaced by its Taylor polynomial in
 *    tau L, integrated exactly against the measure's scalar moments.  This
 *    avoids the absolute eps floor of 1 - exp(-tau L)_ii at tiny tau, which
 *    otherwise caps the result accuracy near 1e-9.
 *  - [tau0, 1]: the measure's power singularity tau^{-1-rho} is absorbed by
 *    the substitution tau = y^{1/(1-rho)} (when rho > 0) and integrated on
 *    dyadically graded Gauss-Legendre panels.
 *  - [1, T]: substitution tau = e^y; beyond T = 60 the exponential has
 *    converged to its stationary projector and the remainder is
 *    (I - exp(-T L)) * upper_tail(T).
 */
inline Eigen::MatrixXd digraph_bernstein_function(const DigraphLaplacian& d,
                                                  const LevyMeasure& nu) {
    if (!nu.density)
        throw std::invalid_argument("digraph_bernstein_function: no density");
    if (!nu.upper_tail)
        throw std::invalid_argument("digraph_bernstein_function: upper tail required");
    int n = d.n_nodes();
    Eigen::MatrixXd L = d.matrix();
    Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
    Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(n, n);

    const double tau0 = 1e-6;
    double rho = nu.singularity_exponent;
    double p = (rho > 0.0) ? 1.0 / (1.0 - rho) : 1.0;  // tau = y^p
    double y0 = std::pow(tau0, 1.0 / p);

    // scalar moments m_j = integral_0^tau0 tau^j nu(tau) dtau, j = 1..4
    double moments[5] = {0, 0, 0, 0, 0};
    {
        auto f = [&](double y, double w) {
            double tau = std::pow(y, p);
            double base = w * p * std::pow(y, p - 1.0) * nu.density(tau);
            double tj = tau;
            for (int j = 1; j <= 4; ++j) {
                moments[j] += base * tj;
                tj *= tau;
            }
        };
        for (int lvl = 0; lvl < 52; ++lvl)
            detail::gl16_panel(y0 * std::pow(2.0, -lvl - 1), y0 * std::pow(2.0, -lvl), f);
    }
    Eigen::MatrixXd Lp = L;
    double fact = 1.0;
    for (int j = 1; j <= 4; ++j) {
        fact *= j;
        acc += ((j & 1) ? 1.0 : -1.0) * (moments[j] / fact) * Lp;
        Lp = Lp * L;
    }

    auto add_point = [&](double tau, double weight) {
        Eigen::MatrixXd E = (-tau * L).exp();
        if (!E.allFinite())
            throw quadrature_error("matrix exponential not finite", tau);
        acc += weight * nu.density(tau) * (I - E);
    };

    // [tau0, 1] on dyadic y-panels
    {
        auto f = [&](double y, double w) {
            double tau = std::pow(y, p);
            add_point(tau, w * p * std::pow(y, p - 1.0));
        };
        int levels = static_cast<int>(std::ceil(-std::log2(y0)));
        for (int lvl = levels; lvl >= 1; --lvl) {
            double a = std::max(y0, std::pow(2.0, -lvl - 1));
            double b = std::pow(2.0, -lvl);
            if (a >= b) continue;
            detail::gl16_panel(a, b, f);
        }
        detail::gl16_panel(0.5, 1.0, f);
    }

    const double T = 60.0;
    auto g = [&](double y, double w) {
        double tau = std::exp(y);
        add_point(tau, w * tau);
    };
    double ylim = std::log(T);
    int panels = 12;
    for (int k = 0; k < panels; ++k)
        detail::gl16_panel(ylim * k / panels, ylim * (k + 1) / panels, g);

    Eigen::MatrixXd Eend = (-T * L).exp();
    acc += nu.upper_tail(T) * (I - Eend);
    return acc;
}

/// Spectral evaluation of L^alpha (diagonalizable L), used as an oracle.
inline Eigen::MatrixXd matrix_frac_power_spectral(const Eigen::MatrixXd& L,
                                                  double alpha) {
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("matrix_frac_power_spectral: eigensolver failed");
    Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::VectorXcd evp(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        std::complex<double> z = ev(i);
        if (std::abs(z) < 1e-13)
            evp(i) = 0.0;  // zero eigenvalue: 0^alpha = 0
        else
            evp(i) = std::pow(z, alpha);
    }
    Eigen::MatrixXcd R = V * evp.asDiagonal() * V.inverse();
    return R.real();
}

}  // namespace stml
