#include <catch2/catch_amalgamated.hpp>

#include <random>
#include <sstream>

#include "stml/digraph.hpp"

using namespace stml;

namespace {

DigraphLaplacian directed_cycle(int n) {
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) omega(i, (i + 1) % n) = 1.0;
    return digraph_from_weights(omega);
}

// ring plus random chords: strongly connected by construction
DigraphLaplacian random_strongly_connected(int n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uw(0.2, 2.0);
    std::uniform_int_distribution<int> un(0, n - 1);
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) omega(i, (i + 1) % n) = uw(rng);
    for (int e = 0; e < 3 * n; ++e) {
        int i = un(rng), j = un(rng);
        if (i != j) omega(i, j) = uw(rng);
    }
    return digraph_from_weights(omega);
}

}  // namespace

TEST_CASE("edge list parsing and validation") {
    std::istringstream ok("0 1 1.0\n1 2 2.0\n# comment\n2 0 0.5\n");
    auto d = digraph_from_edge_list(ok);
    CHECK(d.n_nodes() == 3);
    CHECK(d.out_degrees(1) == 2.0);
    auto L = d.matrix();
    CHECK(L(0, 0) == 1.0);
    CHECK(L(0, 1) == -1.0);

    std::istringstream neg("0 1 -1.0\n1 0 1.0\n");
    CHECK_THROWS_AS(digraph_from_edge_list(neg), std::invalid_argument);

    std::istringstream self("0 0 1.0\n");
    CHECK_THROWS_AS(digraph_from_edge_list(self), std::invalid_argument);

    std::istringstream isolated("0 1 1.0\n");  // node 1 has no out edge
    CHECK_THROWS_AS(digraph_from_edge_list(isolated), std::invalid_argument);
}

TEST_CASE("matrix exponential of the cycle Laplacian") {
    auto d = directed_cycle(3);
    Eigen::MatrixXd E = (-d.matrix()).exp();
    // row-stochastic within 1e-12 and entrywise strictly positive
    for (int i = 0; i < 3; ++i) {
        CHECK(std::fabs(E.row(i).sum() - 1.0) < 1e-12);
        for (int j = 0; j < 3; ++j) CHECK(E(i, j) > 0.0);
    }
}

TEST_CASE("ergodicity") {
    CHECK(check_ergodic(directed_cycle(3), 3));

    // two disconnected 2-cycles
    Eigen::MatrixXd omega = Eigen::MatrixXd::Zero(4, 4);
    omega(0, 1) = omega(1, 0) = 1.0;
    omega(2, 3) = omega(3, 2) = 1.0;
    CHECK_FALSE(check_ergodic(digraph_from_weights(omega), 64));

    // segment without return path to node 0
    Eigen::MatrixXd seg = Eigen::MatrixXd::Zero(3, 3);
    seg(0, 1) = 1.0;
    seg(1, 2) = 1.0;
    seg(2, 1) = 1.0;
    CHECK_FALSE(check_ergodic(digraph_from_weights(seg), 64));
}

TEST_CASE("Bernstein matrix function vs spectral fractional power") {
    auto d = directed_cycle(3);
    double alpha = 0.5;
    Eigen::MatrixXd g = digraph_bernstein_function(d, sibuya_levy_measure(alpha));
    Eigen::MatrixXd exact = matrix_frac_power_spectral(d.matrix(), alpha);
    CHECK((g - exact).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(check_good_laplacian(g, 1e-10).pass());
}

TEST_CASE("eigenvalues of generated Laplacians have nonnegative real parts") {
    for (std::uint64_t seed : {11u, 22u, 33u}) {
        auto d = random_strongly_connected(12, seed);
        Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(d.matrix());
        for (int i = 0; i < 12; ++i) CHECK(es.eigenvalues()(i).real() >= -1e-10);
    }
}

TEST_CASE("random strongly-connected digraph suite") {
    for (std::uint64_t seed : {1u, 2u}) {
        auto d = random_strongly_connected(20, seed);
        CHECK(check_ergodic(d, 64));
        Eigen::MatrixXd E = (-d.matrix()).exp();
        for (int i = 0; i < 20; ++i) {
            CHECK(std::fabs(E.row(i).sum() - 1.0) < 1e-12);
            for (int j = 0; j < 20; ++j) CHECK(E(i, j) > 0.0);
        }
        Eigen::MatrixXd g = digraph_bernstein_function(d, sibuya_levy_measure(0.5));
        CHECK(check_good_laplacian(g, 1e-8).pass());
        Eigen::MatrixXd exact = matrix_frac_power_spectral(d.matrix(), 0.5);
        CHECK((g - exact).cwiseAbs().maxCoeff() < 1e-7);
    }
}

TEST_CASE("ML Levy measure on the cycle matches spectral evaluation") {
    auto d = directed_cycle(4);
    double alpha = 0.5, lambda = 1.0;
    Eigen::MatrixXd g = digraph_bernstein_function(d, ml_levy_measure(alpha, lambda));
    // spectral oracle: g(z) = z^a / (lambda + z^a) applied to eigenvalues
    Eigen::ComplexEigenSolver<Eigen::MatrixXd> es(d.matrix());
    Eigen::MatrixXcd V = es.eigenvectors();
    Eigen::VectorXcd ev = es.eigenvalues();
    Eigen::VectorXcd gv(ev.size());
    for (int i = 0; i < ev.size(); ++i) {
        std::complex<double> z = ev(i);
        if (std::abs(z) < 1e-13) {
            gv(i) = 0.0;
        } else {
            auto za = std::pow(z, alpha);
            gv(i) = za / (lambda + za);
        }
    }
    Eigen::MatrixXd exact = (V * gv.asDiagonal() * V.inverse()).real();
    CHECK((g - exact).cwiseAbs().maxCoeff() < 1e-7);
    CHECK(check_good_laplacian(g, 1e-10).pass());
}
