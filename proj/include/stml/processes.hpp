#pragma once

// Exact state probabilities of the Poisson process and its space-time
// generalizations: fractional Poisson, space-fractional and space-time
// fractional Poisson, the space-time Mittag-Leffler process, and its
// fractional-power generalization.  All are built on one production path:
// coefficient-wise composition of the outer time function (exp or E_beta)
// with the process generator kernel, which keeps every contribution
// nonnegative.  The paper-style explicit double series are kept in tests as
// cross-check oracles.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "stml/laplacian.hpp"
#include "stml/quadrature.hpp"
#include "stml/power_series.hpp"
#include "stml/special_functions.hpp"

namespace stml {

enum class ProcessTag {
    poisson,
    frac_poisson,
    space_frac,
    space_time_frac,
    stml,
    stml_generalized,
    cox,
};

/// Probabilities over states n = 0..N at a fixed time, with an analytic
/// bound for the mass beyond N.
struct StatePMF {
    double time = 0.0;
    std::vector<double> probs;
    double tail_bound = 0.0;
    ProcessParams params;
    ProcessTag tag = ProcessTag::poisson;

    std::size_t max_state() const { return probs.empty() ? 0 : probs.size() - 1; }

    double total_mass() const {
        CompensatedSum s;
        for (double p : probs) s.add(p);
        return s.value() + tail_bound;
    }
};

/// Standard Poisson distribution p_n = (xi t)^n e^{-xi t} / n! by the stable
/// upward recurrence.
inline StatePMF poisson_pmf(double xi, double t, std::size_t N) {
    if (!(xi > 0.0)) throw std::domain_error("poisson_pmf: xi must be > 0");
    if (t < 0.0) throw std::domain_error("poisson_pmf: t must be >= 0");
    StatePMF out;
    out.time = t;
    out.tag = ProcessTag::poisson;
    out.params.xi = xi;
    out.probs.assign(N + 1, 0.0);
    double x = xi * t;
    out.probs[0] = std::exp(-x);
    for (std::size_t n = 1; n <= N; ++n)
        out.probs[n] = out.probs[n - 1] * x / static_cast<double>(n);
    CompensatedSum s;
    for (double p : out.probs) s.add(p);
    out.tail_bound = std::max(0.0, 1.0 - s.value());
    return out;
}

namespace detail {

inline StatePMF pmf_from_kernel_compose(const ProcessParams& p, double t,
                                        const CirculantKernel& generator,
                                        double rate_scale, ProcessTag tag,
                                        const EvalConfig& cfg) {
    double x = p.xi * std::pow(t, p.beta);
    CirculantKernel arg = scale(generator, -x * rate_scale);
    CirculantKernel res = (p.beta == 1.0)
                              ? compose_exp(arg)
                              : compose_scalar(MittagLefflerTaylor{p.beta, arg.coeffs[0], cfg},
                                               arg, cfg);
    StatePMF out;
    out.time = t;
    out.tag = tag;
    out.params = p;
    out.probs = std::move(res.coeffs);
    for (double& v : out.probs) v = std::max(0.0, v);  // clip rounding noise
    out.tail_bound = res.tail_known()
                         ? std::max(0.0, res.tail_sum())
                         : 0.0;
    return out;
}

}  // namespace detail

/// Laskin's fractional Poisson distribution; beta = 1 reduces to Poisson
/// (exactly, by construction).  Computed state-by-state from the scalar form
/// p_n = x^n E^{n+1}_{beta, beta n + 1}(-x), x = xi t^beta, whose defining
/// series is the paper-style double sum and which switches to the algebraic
/// expansion for large x.
inline StatePMF frac_poisson_pmf(const ProcessParams& p, double t, std::size_t N,
                                 const EvalConfig& cfg = {}) {
    p.validate();
    if (t < 0.0) throw std::domain_error("frac_poisson_pmf: t must be >= 0");
    if (p.beta == 1.0) {
        StatePMF out = poisson_pmf(p.xi, t, N);
        out.tag = ProcessTag::frac_poisson;
        out.params = p;
        return out;
    }
    StatePMF out;
    out.time = t;
    out.tag = ProcessTag::frac_poisson;
    out.params = p;
    out.probs.assign(N + 1, 0.0);
    double x = p.xi * std::pow(t, p.beta);
    for (std::size_t n = 0; n <= N; ++n)
        out.probs[n] = ml_state_term(p.beta, x, static_cast<unsigned>(n), cfg);
    CompensatedSum s;
    for (double v : out.probs) s.add(v);
    // the generating function E_beta(-x(1-u)) is entire in u: the tail beyond
    // any N >= a few times x is superexponentially small
    out.tail_bound = std::max(0.0, 1.0 - s.value());
    return out;
}

/// Space-time fractional Poisson process (Sibuya jumps subordinated to a
/// fractional Poisson stream); beta = 1 gives the space-fractional Poisson,
/// alpha = 1 the fractional Poisson.
inline StatePMF space_time_frac_pmf(const ProcessParams& p, double t, std::size_t N,
                                    const EvalConfig& cfg = {}) {
    p.validate();
    if (t < 0.0) throw std::domain_error("space_time_frac_pmf: t must be >= 0");
    auto tag = (p.beta == 1.0) ? ProcessTag::space_frac : ProcessTag::space_time_frac;
    return detail::pmf_from_kernel_compose(p, t, frac_power_one_minus_u(p.alpha, N),
                                           1.0, tag, cfg);
}

/// Space-time Mittag-Leffler process: discrete-ML jumps subordinated to a
/// fractional Poisson stream, generator (lambda+1) g_{ML,alpha}.
inline StatePMF stml_pmf(const ProcessParams& p, double t, std::size_t N,
                         const EvalConfig& cfg = {}) {
    p.validate();
    if (t < 0.0) throw std::domain_error("stml_pmf: t must be >= 0");
    return detail::pmf_from_kernel_compose(p, t, ml_laplacian_genfun(p, N),
                                           p.lambda + 1.0, ProcessTag::stml, cfg);
}

/// Generalized (fractional-power) space-time Mittag-Leffler process with
/// generator (lambda+1)^mu [g_{ML,alpha}]^mu; mu = 1 reduces to stml_pmf.
inline StatePMF stml_generalized_pmf(const ProcessParams& p, double t, std::size_t N,
                                     const EvalConfig& cfg = {}) {
    p.validate();
    if (t < 0.0) throw std::domain_error("stml_generalized_pmf: t must be >= 0");
    return detail::pmf_from_kernel_compose(p, t, generalized_ml_laplacian(p, N),
                                           std::pow(p.lambda + 1.0, p.mu),
                                           ProcessTag::stml_generalized, cfg);
}

enum class AsymptoticRegime { large_n, large_t };

/// Closed-form asymptotes of the space-time Mittag-Leffler state
/// probabilities: fat tail in n at fixed t, and the t^-beta power law at
/// fixed n.
inline double stml_asymptotics(const ProcessParams& p, unsigned n, double t,
                               AsymptoticRegime regime) {
    p.validate();
    if (regime == AsymptoticRegime::large_n) {
        if (p.alpha == 1.0)
            throw std::domain_error("stml_asymptotics: large-n form degenerates at alpha=1");
        double xt = p.xi * std::pow(t, p.beta);
        return p.alpha * (p.lambda + 1.0) * xt *
               std::pow(static_cast<double>(n), -p.alpha - 1.0) /
               (p.lambda * std::tgamma(1.0 - p.alpha) * std::tgamma(1.0 + p.beta));
    }
    if (p.beta == 1.0)
        throw std::domain_error("stml_asymptotics: large-t form degenerates at beta=1");
    double num = (n == 0 ? 1.0 : 0.0) + p.lambda * pochhammer(p.alpha, n) *
                                            std::exp(-std::lgamma(n + 1.0));
    return num / (p.lambda + 1.0) * std::pow(t, -p.beta) /
           (p.xi * std::tgamma(1.0 - p.beta));
}

/**
 * Montroll-Weiss consistency check.  For probe points (u, s) the closed form
 *     s^{beta-1} / (s^beta + xi (lambda+1)(1-u)^alpha / (lambda+(1-u)^alpha))
 * is compared against the numerical time-Laplace transform of the truncated
 * generating function sum_n p_n(t) u^n built from the state probabilities.
 * The transform uses graded composite Gauss panels on [0, T_max] plus the
 * analytic power-law tail of the state probabilities.  Returns the largest
 * relative discrepancy over the probes.
 */
struct MontrollWeissProbe {
    double u;
    double s;
};

inline double montroll_weiss_check(const ProcessParams& p,
                                   const std::vector<MontrollWeissProbe>& probes,
                                   std::size_t N = 256,
                                   const EvalConfig& cfg = {}) {
    p.validate();
    if (p.beta >= 1.0)
        throw std::domain_error("montroll_weiss_check: requires beta < 1 for the tail law");
    for (auto& pr : probes)
        if (!(pr.u >= 0.0 && pr.u < 1.0 && pr.s > 0.0))
            throw std::domain_error("montroll_weiss_check: probe out of range");

    // v = g_0 delta - g >= 0; precompute log of the truncated generating
    // functions of its convolution powers at each probe u
    CirculantKernel g = ml_laplacian_genfun(p, N);
    std::vector<double> v(N + 1, 0.0);
    for (std::size_t k = 1; k <= N; ++k) v[k] = -g.coeffs[k];

    std::size_t nu = probes.size();
    std::vector<double> us;
    for (auto& pr : probes) us.push_back(pr.u);

    // tilde_v[m][iu] = sum_{n<=N} (v^{*m})_n u^n, stored as log
    std::vector<std::vector<double>> log_tilde(N + 1,
                                               std::vector<double>(nu, -1e308));
    {
        std::vector<double> power(N + 1, 0.0);
        power[0] = 1.0;
        double log_scale = 0.0;
        for (std::size_t iu = 0; iu < nu; ++iu) log_tilde[0][iu] = 0.0;
        for (std::size_t m = 1; m <= N; ++m) {
            std::vector<double> next(N + 1, 0.0);
            double maxabs = 0.0;
            for (std::size_t n = m; n <= N; ++n) {
                CompensatedSum cs;
                for (std::size_t k = 1; k <= n - (m - 1); ++k)
                    cs.add(v[k] * power[n - k]);
                next[n] = cs.value();
                maxabs = std::max(maxabs, next[n]);
            }
            if (maxabs == 0.0) break;
            if (maxabs < 1e-250) {
                for (double& x : next) x *= 1e250;
                log_scale -= std::log(1e250);
            }
            power.swap(next);
            for (std::size_t iu = 0; iu < nu; ++iu) {
                CompensatedSum cs;
                for (std::size_t n = m; n <= N; ++n)
                    if (power[n] != 0.0) cs.add(power[n] * std::pow(us[iu], double(n)));
                double val = cs.value();
                log_tilde[m][iu] = (val > 0.0) ? std::log(val) + log_scale : -1e308;
            }
        }
    }

    double c = p.xi * (p.lambda + 1.0);
    auto pbar = [&](double t, std::size_t iu) {
        // truncated generating function sum_{n<=N} p_n(t) u^n
        double x = p.xi * std::pow(t, p.beta);
        CompensatedSum cs;
        for (std::size_t m = 0; m <= N; ++m) {
            if (log_tilde[m][iu] <= -1e307) continue;
            LogValue fm = log_prabhakar(p.beta, p.beta * m + 1.0, m + 1.0, -x, cfg);
            if (fm.sign <= 0) continue;
            double lt = fm.logabs + m * std::log(x * (p.lambda + 1.0)) + log_tilde[m][iu];
            if (lt < -745.0) {
                if (m > 8 && x * (p.lambda + 1.0) < static_cast<double>(m)) break;
                continue;
            }
            cs.add(std::exp(lt));
        }
        return cs.value();
    };

    double T = 50.0 * std::pow(p.xi, -1.0 / p.beta);
    double worst = 0.0;
    for (std::size_t iu = 0; iu < nu; ++iu) {
        const auto& probe = probes[iu];
        double va = std::pow(1.0 - probe.u, p.alpha);
        double lhs = std::pow(probe.s, p.beta - 1.0) /
                     (std::pow(probe.s, p.beta) + c * va / (p.lambda + va));

        // graded panels: [0,T] split geometrically toward 0 to resolve t^beta
        CompensatedSum integral;
        int geo = 30, flat = 40;
        double t_lo = T * std::pow(2.0, -geo);
        auto add_panel = [&](double a, double b) {
            detail::gl16_panel(a, b, [&](double t, double w) {
                integral.add(w * std::exp(-probe.s * t) * pbar(t, iu));
            });
        };
        add_panel(0.0, t_lo);
        for (int k = geo; k >= 1; --k)
            add_panel(T * std::pow(2.0, -k), T * std::pow(2.0, -k + 1) *
                                                 (k == 1 ? 0.5 : 1.0));
        for (int k = 0; k < flat; ++k)
            add_panel(0.5 * T + 0.5 * T * k / flat, 0.5 * T + 0.5 * T * (k + 1) / flat);

        // analytic tail from the large-t law of the state probabilities:
        //   pbar(u,t) ~ (1 + lambda (1-u)^-alpha)/((lambda+1) xi)
        //               * t^-beta / Gamma(1-beta)
        double C = (1.0 + p.lambda * std::pow(1.0 - probe.u, -p.alpha)) /
                   ((p.lambda + 1.0) * p.xi * std::tgamma(1.0 - p.beta));
        // integral_T^inf e^{-s t} t^{-beta} dt = s^{beta-1} Gamma(1-beta, s T)
        double tail = C * std::pow(probe.s, p.beta - 1.0) *
                      detail::upper_incomplete_gamma(1.0 - p.beta, probe.s * T);
        double rhs = integral.value() + tail;
        worst = std::max(worst, std::fabs(rhs - lhs) / std::fabs(lhs));
    }
    return worst;
}

/// Cox series: p = sum_k Phi^{(k)}(t) W^{*k} for a stochastic jump kernel W
/// and counting probabilities Phi^{(k)}(t).
inline StatePMF cox_series_pmf(const CirculantKernel& W,
                               const std::function<double(unsigned)>& counting,
                               double t, std::size_t N) {
    if (!W.stochastic)
        throw std::invalid_argument("cox_series_pmf: jump kernel must be stochastic");
    if (W.order() < N)
        throw std::invalid_argument("cox_series_pmf: jump kernel shorter than N");
    StatePMF out;
    out.time = t;
    out.tag = ProcessTag::cox;
    std::vector<CompensatedSum> acc(N + 1);
    std::vector<double> w(W.coeffs.begin(), W.coeffs.begin() + N + 1);
    std::vector<double> power(N + 1, 0.0);
    power[0] = 1.0;
    double phi_seen = 0.0;
    double tail = 0.0;
    for (std::size_t k = 0; k <= N; ++k) {
        double phi = counting(static_cast<unsigned>(k));
        phi_seen += phi;
        CompensatedSum mass;
        for (std::size_t n = 0; n <= N; ++n) {
            if (power[n] == 0.0) continue;
            acc[n].add(phi * power[n]);
            mass.add(power[n]);
        }
        tail += phi * std::max(0.0, 1.0 - mass.value());
        if (k == N) break;
        std::vector<double> next(N + 1, 0.0);
        double maxabs = 0.0;
        for (std::size_t n = k + 1; n <= N; ++n) {
            CompensatedSum cs;
            for (std::size_t j = 1; j <= n - k; ++j) cs.add(w[j] * power[n - j]);
            next[n] = cs.value();
            maxabs = std::max(maxabs, next[n]);
        }
        power.swap(next);
        if (maxabs == 0.0 && phi_seen > 1.0 - 1e-15) break;
    }
    tail += std::max(0.0, 1.0 - phi_seen);
    out.probs.assign(N + 1, 0.0);
    for (std::size_t n = 0; n <= N; ++n) out.probs[n] = acc[n].value();
    out.tail_bound = tail;
    return out;
}

}  // namespace stml
