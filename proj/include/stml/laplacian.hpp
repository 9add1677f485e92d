#pragma once

// Construction and verification of "good Laplacian" generators for strictly
// increasing walks on the integer line: fractional (Sibuya) Laplacians,
// Mittag-Leffler Laplacian generating functions, their fractional powers,
// and generators obtained by Levy-Khintchine quadrature.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

#include "stml/power_series.hpp"
#include "stml/quadrature.hpp"
#include "stml/special_functions.hpp"

namespace stml {

/// Parameter tuple (alpha, beta, mu, lambda, xi, lambda0) of a process
/// instance.  alpha: space order; beta: time order; mu: outer fractional
/// power; lambda: discrete scale; xi: rate [sec^-beta]; lambda0: continuum
/// scale [cm^-alpha].
struct ProcessParams {
    double alpha = 1.0;
    double beta = 1.0;
    double mu = 1.0;
    double lambda = 1.0;
    double xi = 1.0;
    double lambda0 = 1.0;

    void validate() const {
        if (!(alpha > 0.0 && alpha <= 1.0))
            throw std::domain_error("ProcessParams: alpha must be in (0,1]");
        if (!(beta > 0.0 && beta <= 1.0))
            throw std::domain_error("ProcessParams: beta must be in (0,1]");
        if (!(mu > 0.0 && mu <= 1.0))
            throw std::domain_error("ProcessParams: mu must be in (0,1]");
        if (!(lambda > 0.0)) throw std::domain_error("ProcessParams: lambda must be > 0");
        if (!(xi > 0.0)) throw std::domain_error("ProcessParams: xi must be > 0");
        if (!(lambda0 > 0.0)) throw std::domain_error("ProcessParams: lambda0 must be > 0");
    }
};

/// Sibuya(alpha) pmf w_alpha(k) = (-1)^{k-1} binom(alpha, k), k >= 1.
inline double sibuya_pmf(double alpha, unsigned k) {
    if (k == 0) return 0.0;
    return -one_minus_u_power_coeff(alpha, k);
}

/// Sibuya survival P(Z > k) = Gamma(k+1-alpha) / (Gamma(1-alpha) Gamma(k+1)).
inline double sibuya_survival(double alpha, unsigned k) {
    return -one_minus_u_power_tail(alpha, k);
}

/// Coefficients of g_{ML,alpha}(1-u, lambda) = (1-u)^alpha / (lambda + (1-u)^alpha).
/// Coefficient 0 equals 1/(lambda+1).
inline CirculantKernel ml_laplacian_genfun(const ProcessParams& p, std::size_t N) {
    p.validate();
    CirculantKernel s = frac_power_one_minus_u(p.alpha, N);
    return convolve(s, reciprocal(add_scalar(s, p.lambda)));
}

/// Coefficients of [g_{ML,alpha}]^mu = (1-u)^{alpha mu} / (lambda + (1-u)^alpha)^mu.
/// For mu = 1 this reduces to ml_laplacian_genfun.
inline CirculantKernel generalized_ml_laplacian(const ProcessParams& p, std::size_t N) {
    p.validate();
    if (p.mu == 1.0) return ml_laplacian_genfun(p, N);
    CirculantKernel s = frac_power_one_minus_u(p.alpha, N);
    CirculantKernel denom_pow = kernel_pow(add_scalar(s, p.lambda), -p.mu);
    CirculantKernel num = frac_power_one_minus_u(p.alpha * p.mu, N);
    return convolve(num, denom_pow);
}

/// Diagnostic for the good Laplacian properties (i)-(iii) of a circulant
/// generator row: zero row sum (tail corrected), positive diagonal,
/// non-positive off-diagonal entries.
struct GoodLaplacianReport {
    double row_sum_residual = 0.0;  // |sum of coeffs + tail|
    double diagonal = 0.0;          // coefficient 0
    double max_offdiagonal = 0.0;   // largest coefficient at k >= 1
    bool tail_included = false;
    bool row_sum_ok = false;
    bool diagonal_ok = false;
    bool offdiag_ok = false;
    bool pass() const { return row_sum_ok && diagonal_ok && offdiag_ok; }
};

inline GoodLaplacianReport check_good_laplacian(const CirculantKernel& g,
                                                double tol = 1e-9) {
    GoodLaplacianReport r;
    CompensatedSum s;
    double max_off = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k <= g.order(); ++k) {
        s.add(g.coeffs[k]);
        if (k >= 1) max_off = std::max(max_off, g.coeffs[k]);
    }
    double sum = s.value();
    if (g.tail_known()) {
        sum += g.tail_sum();
        r.tail_included = true;
    }
    r.row_sum_residual = std::fabs(sum);
    r.diagonal = g.coeffs[0];
    r.max_offdiagonal = max_off;
    r.row_sum_ok = r.row_sum_residual < tol;
    r.diagonal_ok = r.diagonal > 0.0;
    r.offdiag_ok = max_off <= 1e-12;
    return r;
}

/// One-step transition kernel W of the walk generated by g:
///   W_0 = 0, W_n = -g_n / g_0  (n >= 1), flagged stochastic.
/// The gate tolerance is looser than the N=1024 acceptance threshold because
/// the honest tail floor grows as the truncation order shrinks.
inline CirculantKernel transition_from_laplacian(const CirculantKernel& g,
                                                 double tol = 1e-6) {
    GoodLaplacianReport rep = check_good_laplacian(g, tol);
    if (!rep.pass())
        throw std::invalid_argument(
            "transition_from_laplacian: generator fails good-Laplacian checks");
    CirculantKernel w(g.order());
    double inv = 1.0 / g.coeffs[0];
    w.coeffs[0] = 0.0;
    for (std::size_t k = 1; k <= g.order(); ++k)
        w.coeffs[k] = std::max(0.0, -g.coeffs[k] * inv);
    // W(u) = 1 - g(1-u)/g(1), so the singular expansion follows directly
    w.singular = g.singular.scaled(-inv).plus_constant(1.0);
    w.stochastic = true;
    return w;
}

/// Levy measure nu(dtau) = density(tau) dtau on (0, inf) with
/// integral of min(1,tau) nu(dtau) finite.  `singularity_exponent` is rho in
/// the small-tau behavior tau^{-1-rho} (negative when the density vanishes at
/// the origin).  `upper_tail(T)`, when supplied, returns the exact integral
/// of the density over (T, inf), used for the n = 0 generator entry.
struct LevyMeasure {
    std::function<double(double)> density;
    double singularity_exponent = 0.0;
    std::function<double(double)> upper_tail;  // may be empty
};

/// nu_alpha(tau) = [alpha / Gamma(1-alpha)] tau^{-1-alpha}: the measure whose
/// Bernstein function is (1-u)^alpha (Sibuya / stable subordinator measure).
inline LevyMeasure sibuya_levy_measure(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::domain_error("sibuya_levy_measure: alpha must be in (0,1)");
    double c = alpha / std::tgamma(1.0 - alpha);
    LevyMeasure nu;
    nu.density = [c, alpha](double t) { return c * std::pow(t, -1.0 - alpha); };
    nu.singularity_exponent = alpha;
    nu.upper_tail = [alpha](double T) {
        return std::pow(T, -alpha) / std::tgamma(1.0 - alpha);
    };
    return nu;
}

/// nu_{ML,alpha}(tau) = lambda tau^{alpha-1} E_{alpha,alpha}(-lambda tau^alpha),
/// itself a Mittag-Leffler density with Laplace transform lambda/(lambda+s^alpha).
inline LevyMeasure ml_levy_measure(double alpha, double lambda) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("ml_levy_measure: alpha must be in (0,1]");
    LevyMeasure nu;
    nu.density = [alpha, lambda](double t) {
        return lambda * std::pow(t, alpha - 1.0) *
               mittag_leffler(alpha, alpha, -lambda * std::pow(t, alpha));
    };
    nu.singularity_exponent = -alpha;  // tau^{alpha-1} at the origin
    nu.upper_tail = [alpha, lambda](double T) {
        return mittag_leffler(alpha, -lambda * std::pow(T, alpha));
    };
    return nu;
}

/**
 * Generator entries from the Levy-Khintchine representation:
 *   [g]_n = integral over tau of [delta_{n0} - e^-tau tau^n / n!] nu(tau) dtau.
 *
 * The integral is split at tau = 1.  On (0,1] the integrand carries the
 * measure's power singularity, handled by the adaptive rule with
 * extrapolation; on [1, T] it is smooth, and the remainder beyond T is either
 * negligible (n >= 1, Poisson factor) or supplied analytically by the
 * measure's upper tail (n = 0).
 */
inline CirculantKernel laplacian_from_levy(const LevyMeasure& nu, std::size_t N,
                                           double tol = 1e-10) {
    if (!nu.density) throw std::invalid_argument("laplacian_from_levy: no density");
    CirculantKernel g(N);
    for (std::size_t n = 0; n <= N; ++n) {
        double lognfact = std::lgamma(static_cast<double>(n) + 1.0);
        std::function<double(double)> integrand = [&, n, lognfact](double t) {
            double base = (n == 0)
                              ? 1.0 - std::exp(-t)
                              : -std::exp(-t + static_cast<double>(n) * std::log(t) -
                                          lognfact);
            return base * nu.density(t);
        };
        double nn = static_cast<double>(n);
        double T = std::max(60.0, nn + 15.0 * std::sqrt(nn) + 20.0);
        double v = detail::gsl_adaptive(integrand, 0.0, 1.0, tol) +
                   detail::gsl_adaptive(integrand, 1.0, T, tol);
        if (n == 0) {
            if (!nu.upper_tail)
                throw std::invalid_argument(
                    "laplacian_from_levy: measure needs an upper tail for n = 0");
            v += nu.upper_tail(T);  // e^-tau is ~1e-26 there; 1 - e^-tau ~ 1
        }
        g.coeffs[n] = v;
    }
    g.singular = PuiseuxSeries::unknown();
    return g;
}

}  // namespace stml
