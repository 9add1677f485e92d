#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "stml/processes.hpp"

using namespace stml;

namespace golden {
// frozen from 60-digit partial sums of the defining series (see the series
// oracles below for the formulas)
constexpr double stml_p0 = 0.3931083028157540617696;   // a=.5 b=.75 l=1 xi=1 t=1
constexpr double stml_p1 = 0.0774125733669871439814;
constexpr double stml_p2 = 0.04965493264381242478322;
constexpr double stml_gen_p0 = 0.3678794411714423215955;  // a=.5 mu=.5 b=1 l=.5
constexpr double stml_gen_p1 = 0.03065662009762019346629;
constexpr double stml_gen_p2 = 0.0204377467317467956442;
constexpr double fp_p1 = 0.3096502934679485759256048;  // b=.75 xi=1 t=1
constexpr double stf_p1 = 0.1839397205857211607977619;  // a=.5 b=1 xi=1 t=1
}  // namespace golden

namespace {

// Oracle: the lambda != 1 double series for the stml state probabilities,
// Eq.-style: p_n = sum_m [-(l+1) x]^m / Gamma(bm+1) * E^{(m)}(l, n) with the
// two-branch discrete Prabhakar approximation.
double stml_series_oracle(double a, double b, double l, double x, unsigned n) {
    auto Emn = [&](int m) {
        CompensatedSum s;
        if (l < 1.0) {
            for (int j = 0; j < 3000; ++j) {
                // (-l)^j (m)_j / j! * Gamma(aj+n)/Gamma(aj)
                double rf = std::exp(std::lgamma(double(m) + j) - std::lgamma(double(m)) -
                                     std::lgamma(j + 1.0));
                double gr;
                if (j == 0) {
                    gr = (n == 0) ? 1.0 : 0.0;  // Gamma(n)/Gamma(0) = 0 for n>=1
                } else {
                    gr = std::exp(std::lgamma(a * j + n) - std::lgamma(a * j));
                }
                double term = ((j & 1) ? -1.0 : 1.0) * std::pow(l, j) * rf * gr;
                if (m == 0) term = (j == 0 && n == 0) ? 1.0 : 0.0;
                s.add(term);
                if (j > 20 && std::fabs(term) < 1e-18) break;
            }
            return s.value() * std::exp(-std::lgamma(n + 1.0));
        }
        for (int j = 0; j < 3000; ++j) {
            double rf = (m == 0 && j == 0) ? 1.0
                        : (m == 0) ? 0.0
                                   : std::exp(std::lgamma(double(m) + j) -
                                              std::lgamma(double(m)) - std::lgamma(j + 1.0));
            double prod = 1.0;  // Gamma(a(j+m)+1)/Gamma(a(j+m)+1-n) finite product
            for (unsigned q = 0; q < n; ++q) prod *= a * (j + m) - q;
            double term = ((j & 1) ? -1.0 : 1.0) * std::pow(l, -double(j)) * rf * prod;
            s.add(term);
            if (j > 20 && std::fabs(term) < 1e-18) break;
        }
        return ((n & 1) ? -1.0 : 1.0) * std::pow(l, -double(0)) * s.value() *
               std::exp(-std::lgamma(n + 1.0));
    };
    CompensatedSum out;
    for (int m = 0; m < 500; ++m) {
        double w = std::exp(m * std::log((l + 1.0) * x) - std::lgamma(b * m + 1.0));
        double e = (l > 1.0) ? std::pow(l, -double(m)) * Emn(m) : Emn(m);
        double term = ((m & 1) ? -1.0 : 1.0) * w * e;
        out.add(term);
        if (m > 20 && std::fabs(w) < 1e-18) break;
    }
    return out.value();
}

// Laskin fractional Poisson double series (small x only)
double laskin_series(double b, double x, unsigned n) {
    CompensatedSum s;
    for (int m = 0; m < 2000; ++m) {
        double t = std::exp(std::lgamma(double(m + n) + 1.0) - std::lgamma(m + 1.0) +
                            m * std::log(x) - std::lgamma((m + n) * b + 1.0));
        s.add(((m & 1) ? -1.0 : 1.0) * t);
        if (m > 20 && t < 1e-18) break;
    }
    return std::exp(n * std::log(x) - std::lgamma(n + 1.0)) * s.value();
}

}  // namespace

TEST_CASE("poisson_pmf") {
    auto p0 = poisson_pmf(1.0, 0.0, 8);
    CHECK(p0.probs[0] == 1.0);
    CHECK(p0.probs[1] == 0.0);

    auto p = poisson_pmf(1.0, 1.0, 32);
    CHECK(p.probs[0] == Catch::Approx(std::exp(-1.0)).epsilon(1e-15));

    auto q = poisson_pmf(2.0, 3.0, 32);
    CHECK(q.probs[5] == Catch::Approx(std::pow(6.0, 5) * std::exp(-6.0) / 120.0).epsilon(1e-13));
    CHECK(q.total_mass() == Catch::Approx(1.0).margin(1e-12));
}

TEST_CASE("frac_poisson_pmf") {
    ProcessParams p;
    p.beta = 0.75;
    // p_0 = E_beta(-x)
    auto f = frac_poisson_pmf(p, 1.0, 64);
    CHECK(f.probs[0] == Catch::Approx(mittag_leffler(0.75, -1.0)).epsilon(1e-13));
    CHECK(f.probs[1] == Catch::Approx(golden::fp_p1).epsilon(1e-12));
    CHECK(f.total_mass() == Catch::Approx(1.0).margin(1e-9));

    // matches Laskin's double series
    for (unsigned n = 0; n <= 8; ++n)
        CHECK(f.probs[n] == Catch::Approx(laskin_series(0.75, 1.0, n)).margin(1e-12));

    // beta = 1 reduction to Poisson within 1e-12
    p.beta = 1.0;
    p.xi = 1.3;
    auto g = frac_poisson_pmf(p, 2.0, 64);
    auto e = poisson_pmf(1.3, 2.0, 64);
    for (std::size_t n = 0; n <= 64; ++n)
        CHECK(g.probs[n] == Catch::Approx(e.probs[n]).margin(1e-12));
}

TEST_CASE("space_time_frac_pmf") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 1.0;
    auto f = space_time_frac_pmf(p, 1.0, 128);
    CHECK(f.probs[1] == Catch::Approx(golden::stf_p1).epsilon(1e-12));
    CHECK(f.probs[0] == Catch::Approx(mittag_leffler(1.0, 1.0, -1.0)).epsilon(1e-12));
    CHECK(f.total_mass() == Catch::Approx(1.0).margin(1e-9));

    // alpha = 1 reduces to the fractional Poisson within 1e-10
    p.alpha = 1.0;
    p.beta = 0.75;
    auto g = space_time_frac_pmf(p, 1.5, 64);
    auto e = frac_poisson_pmf(p, 1.5, 64);
    for (std::size_t n = 0; n <= 64; ++n)
        CHECK(g.probs[n] == Catch::Approx(e.probs[n]).margin(1e-10));

    // p_0 = E_beta(-x) for the space-time case too
    p.alpha = 0.6;
    p.beta = 0.75;
    auto h = space_time_frac_pmf(p, 2.0, 32);
    CHECK(h.probs[0] ==
          Catch::Approx(mittag_leffler(0.75, -p.xi * std::pow(2.0, 0.75))).epsilon(1e-12));
}

TEST_CASE("stml_pmf golden values and survival identity") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    p.lambda = 1.0;
    auto f = stml_pmf(p, 1.0, 64);
    CHECK(f.probs[0] == Catch::Approx(golden::stml_p0).epsilon(1e-12));
    CHECK(f.probs[1] == Catch::Approx(golden::stml_p1).epsilon(1e-12));
    CHECK(f.probs[2] == Catch::Approx(golden::stml_p2).epsilon(1e-12));
    CHECK(f.total_mass() == Catch::Approx(1.0).margin(1e-9));

    // t = 0 initial condition
    auto z = stml_pmf(p, 0.0, 16);
    CHECK(z.probs[0] == 1.0);
    for (std::size_t n = 1; n <= 16; ++n) CHECK(z.probs[n] == 0.0);

    // survival p_0(t) = E_beta(-xi t^beta) across parameters and times
    for (double a : {0.5, 0.9})
        for (double l : {0.5, 1.0, 2.0})
            for (double t : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0}) {
                ProcessParams q;
                q.alpha = a;
                q.beta = 0.75;
                q.lambda = l;
                auto s = stml_pmf(q, t, 8);
                double expect = mittag_leffler(0.75, -std::pow(t, 0.75));
                INFO("a=" << a << " l=" << l << " t=" << t);
                CHECK(s.probs[0] == Catch::Approx(expect).margin(1e-10));
            }
}

TEST_CASE("stml_pmf matches the two-branch series oracle away from lambda=1") {
    for (double l : {0.5, 2.0}) {
        ProcessParams p;
        p.alpha = 0.5;
        p.beta = 0.75;
        p.lambda = l;
        auto f = stml_pmf(p, 1.0, 64);
        for (unsigned n = 0; n <= 10; ++n) {
            INFO("lambda=" << l << " n=" << n);
            CHECK(f.probs[n] ==
                  Catch::Approx(stml_series_oracle(0.5, 0.75, l, 1.0, n)).margin(1e-10));
        }
    }
}

TEST_CASE("stml_generalized_pmf") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 1.0;
    p.mu = 0.5;
    p.lambda = 0.5;
    auto f = stml_generalized_pmf(p, 1.0, 64);
    CHECK(f.probs[0] == Catch::Approx(golden::stml_gen_p0).epsilon(1e-12));
    CHECK(f.probs[1] == Catch::Approx(golden::stml_gen_p1).epsilon(1e-12));
    CHECK(f.probs[2] == Catch::Approx(golden::stml_gen_p2).epsilon(1e-12));
    CHECK(f.total_mass() == Catch::Approx(1.0).margin(1e-9));

    // p_0 = E_beta(-x): coefficient 0 of the generator is (l+1)^-mu
    p.beta = 0.75;
    auto g = stml_generalized_pmf(p, 2.0, 16);
    CHECK(g.probs[0] ==
          Catch::Approx(mittag_leffler(0.75, -std::pow(2.0, 0.75))).margin(1e-11));

    // mu = 1 reduction within 1e-10
    p.mu = 1.0;
    p.lambda = 1.5;
    auto r1 = stml_generalized_pmf(p, 1.0, 64);
    auto r2 = stml_pmf(p, 1.0, 64);
    for (std::size_t n = 0; n <= 64; ++n)
        CHECK(r1.probs[n] == Catch::Approx(r2.probs[n]).margin(1e-10));
}

TEST_CASE("reduction lattice: stml with huge lambda approaches frac poisson") {
    ProcessParams p;
    p.alpha = 1.0;
    p.beta = 0.75;
    p.lambda = 1e6;
    auto s = stml_pmf(p, 1.0, 32);
    auto f = frac_poisson_pmf(p, 1.0, 32);
    for (std::size_t n = 0; n <= 32; ++n)
        CHECK(s.probs[n] == Catch::Approx(f.probs[n]).margin(1e-4));
}

TEST_CASE("monotone survival") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    double prev = 1.0;
    for (int i = 1; i <= 100; ++i) {
        double t = 0.1 * i;
        auto s = stml_pmf(p, t, 2);
        CHECK(s.probs[0] <= prev + 1e-12);
        prev = s.probs[0];
    }
}

TEST_CASE("stml asymptotics") {
    // large-t at n=0: t^-beta / (xi Gamma(1-beta))
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    double t = 1e4;  // xi^{1/b} t = 1e4
    CHECK(stml_asymptotics(p, 0, t, AsymptoticRegime::large_t) ==
          Catch::Approx(std::pow(t, -0.75) / std::tgamma(0.25)).epsilon(1e-12));

    // large-n ratio against the computed pmf at n = 1e4 (beta = 1)
    ProcessParams q;
    q.alpha = 0.5;
    q.beta = 1.0;
    q.lambda = 1.0;
    auto f = stml_pmf(q, 1.0, 10000);
    double ratio = stml_asymptotics(q, 10000, 1.0, AsymptoticRegime::large_n) /
                   f.probs[10000];
    CHECK(ratio == Catch::Approx(1.0).margin(0.05));

    // large-t ratio at n = 0 and n = 1
    for (unsigned n : {0u, 1u}) {
        auto s = stml_pmf(p, t, 4);
        double r = stml_asymptotics(p, n, t, AsymptoticRegime::large_t) / s.probs[n];
        INFO("n=" << n);
        CHECK(r == Catch::Approx(1.0).margin(0.05));
    }

    CHECK_THROWS_AS(stml_asymptotics(ProcessParams{}, 10, 1.0, AsymptoticRegime::large_n),
                    std::domain_error);
    CHECK_THROWS_AS(stml_asymptotics(ProcessParams{}, 10, 1.0, AsymptoticRegime::large_t),
                    std::domain_error);
}

TEST_CASE("Montroll-Weiss equivalence") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    p.lambda = 1.0;
    p.xi = 1.0;
    std::vector<MontrollWeissProbe> probes;
    for (double u : {0.0, 0.2, 0.4, 0.6, 0.8})
        for (double s : {0.3, 0.6, 1.0, 2.0, 4.0}) probes.push_back({u, s});
    double disc = montroll_weiss_check(p, probes, 256);
    INFO("max relative discrepancy " << disc);
    CHECK(disc < 1e-3);
}

TEST_CASE("cox series") {
    // homogeneous stream + unit shift: p_n(t) = delta_{n, floor(t)}
    auto w = shift_kernel(32, 1);
    w.stochastic = true;
    double t = 3.7;
    auto windowed = [&](unsigned k) {
        return (t >= k && t < k + 1) ? 1.0 : 0.0;
    };
    auto pw = cox_series_pmf(w, windowed, t, 32);
    for (std::size_t n = 0; n <= 32; ++n)
        CHECK(pw.probs[n] == (n == 3 ? 1.0 : 0.0));

    // Poisson stream + unit shift = Poisson pmf
    auto pois = poisson_pmf(1.0, 1.0, 32);
    auto pp = cox_series_pmf(
        w, [&](unsigned k) { return k <= 32 ? pois.probs[k] : 0.0; }, 1.0, 32);
    for (std::size_t n = 0; n <= 32; ++n)
        CHECK(pp.probs[n] == Catch::Approx(pois.probs[n]).margin(1e-14));

    // fractional Poisson stream + ML jumps = stml (path equivalence)
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    p.lambda = 1.0;
    for (double tt : {1.0, 5.0}) {
        auto counting = frac_poisson_pmf(p, tt, 120);
        auto W = transition_from_laplacian(ml_laplacian_genfun(p, 120));
        auto cox = cox_series_pmf(
            W, [&](unsigned k) { return k <= 120 ? counting.probs[k] : 0.0; }, tt, 120);
        auto direct = stml_pmf(p, tt, 120);
        double maxdiff = 0.0;
        for (std::size_t n = 0; n <= 50; ++n)
            maxdiff = std::max(maxdiff, std::fabs(cox.probs[n] - direct.probs[n]));
        INFO("t=" << tt << " maxdiff=" << maxdiff);
        CHECK(maxdiff < 1e-8);
    }
}

TEST_CASE("Kolmogorov-Feller residual in the Markov case (beta = 1)") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 1.0;
    p.lambda = 1.0;
    std::size_t N = 64;
    auto g = ml_laplacian_genfun(p, N);
    double t = 1.0, dt = 1e-4;
    auto plus = stml_pmf(p, t + dt, N);
    auto minus = stml_pmf(p, t - dt, N);
    auto mid = stml_pmf(p, t, N);
    double worst = 0.0;
    for (std::size_t n = 0; n <= N / 2; ++n) {
        double dpdt = (plus.probs[n] - minus.probs[n]) / (2.0 * dt);
        CompensatedSum conv;
        for (std::size_t m = 0; m <= n; ++m)
            conv.add(mid.probs[m] * g.coeffs[n - m]);
        double resid = dpdt + p.xi * (p.lambda + 1.0) * conv.value();
        worst = std::max(worst, std::fabs(resid));
    }
    CHECK(worst < 1e-5);
}

TEST_CASE("Caputo L1 residual shrinks under refinement (beta < 1)") {
    ProcessParams p;
    p.alpha = 0.5;
    p.beta = 0.75;
    p.lambda = 1.0;
    std::size_t N = 24;
    auto g = ml_laplacian_genfun(p, N);

    auto max_residual = [&](double dt) {
        int steps = static_cast<int>(std::round(1.0 / dt));
        // p_n on the grid
        std::vector<std::vector<double>> grid(steps + 1);
        for (int k = 0; k <= steps; ++k) grid[k] = stml_pmf(p, k * dt, N).probs;
        double cb = std::pow(dt, -p.beta) / std::tgamma(2.0 - p.beta);
        double worst = 0.0;
        // evaluate away from the initial layer
        for (int k = (3 * steps) / 4; k <= steps; ++k) {
            for (std::size_t n = 0; n <= 8; ++n) {
                CompensatedSum acc;
                for (int j = 0; j < k; ++j) {
                    double a = std::pow(j + 1.0, 1.0 - p.beta) - std::pow(double(j), 1.0 - p.beta);
                    acc.add(a * (grid[k - j][n] - grid[k - j - 1][n]));
                }
                double caputo = cb * acc.value();
                CompensatedSum conv;
                for (std::size_t m = 0; m <= n; ++m)
                    conv.add(grid[k][m] * g.coeffs[n - m]);
                double resid = caputo + p.xi * (p.lambda + 1.0) * conv.value();
                worst = std::max(worst, std::fabs(resid));
            }
        }
        return worst;
    };

    double coarse = max_residual(1.0 / 64);
    double fine = max_residual(1.0 / 128);
    INFO("coarse=" << coarse << " fine=" << fine);
    CHECK(coarse / fine >= 1.5);
}
