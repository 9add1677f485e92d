#pragma once

// Scalar special functions: Pochhammer symbols, two-parameter Mittag-Leffler
// and three-parameter Prabhakar functions, evaluated on the real line.
//
// Series terms are formed in log space so intermediate magnitudes never
// overflow, sums are accumulated with compensated (Kahan) addition, and for
// strongly negative arguments the power series is replaced by the algebraic
// asymptotic expansion.  Each regime carries an error estimate; in the band
// around the crossover both regimes are evaluated and the better one wins.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace stml {

inline constexpr double kPi = 3.14159265358979323846;

/// Truncation control shared by all infinite-series evaluations.
struct EvalConfig {
    double abs_tol = 1e-14;
    int max_terms = 10000;
};

class non_convergent_error : public std::runtime_error {
  public:
    explicit non_convergent_error(const std::string& what) : std::runtime_error(what) {}
};

/// Kahan-compensated accumulator.
class CompensatedSum {
  public:
    void add(double x) {
        double y = x - c_;
        double t = s_ + y;
        c_ = (t - s_) - y;
        s_ = t;
    }
    double value() const { return s_; }

  private:
    double s_ = 0.0;
    double c_ = 0.0;
};

/// A real number carried as sign * exp(logabs); sign == 0 encodes exact zero.
struct LogValue {
    double logabs = -std::numeric_limits<double>::infinity();
    int sign = 0;

    double to_double() const { return sign == 0 ? 0.0 : sign * std::exp(logabs); }

    static LogValue from(double v) {
        if (v == 0.0) return {};
        return {std::log(std::fabs(v)), v > 0 ? 1 : -1};
    }
};

/// sin(pi*x) with argument reduction done on x itself.
inline double sin_pi(double x) {
    double k = std::round(x);
    double r = x - k;
    double s = std::sin(kPi * r);
    return (static_cast<long long>(k) % 2 == 0) ? s : -s;
}

/// log(1/Gamma(x)) with sign; poles of Gamma map to exact zero.
inline LogValue log_recip_gamma(double x) {
    if (x > 0.0) return {-std::lgamma(x), 1};
    // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    double s = sin_pi(x);
    if (s == 0.0) return {};  // non-positive integer: 1/Gamma = 0
    return {std::log(std::fabs(s)) + std::lgamma(1.0 - x) - std::log(kPi),
            s > 0 ? 1 : -1};
}

/// Pochhammer symbol (c)_m = Gamma(c+m)/Gamma(c); exact for m = 0 and for
/// products that hit a zero factor.
inline double pochhammer(double c, unsigned m) {
    if (m == 0) return 1.0;
    if (m <= 64) {
        double p = 1.0;
        for (unsigned k = 0; k < m; ++k) p *= c + k;
        if (std::isinf(p)) throw std::overflow_error("pochhammer: product overflow");
        return p;
    }
    // large m: log-gamma differences; count sign changes from negative factors
    if (c > 0.0) {
        double lg = std::lgamma(c + m) - std::lgamma(c);
        if (lg > 709.0) throw std::overflow_error("pochhammer: overflow");
        return std::exp(lg);
    }
    if (c == std::floor(c)) return 0.0;  // non-positive integer start, m > -c
    unsigned nneg = static_cast<unsigned>(std::ceil(-c));
    if (nneg >= m) nneg = m;
    // |(c)_m| = Gamma(1-c)/Gamma(1-c-nneg) * Gamma(c+m)/Gamma(c+nneg) pieces;
    // simply accumulate logs of |c+k|
    double lg = 0.0;
    int sign = 1;
    for (unsigned k = 0; k < m; ++k) {
        double f = c + k;
        if (f < 0) sign = -sign;
        lg += std::log(std::fabs(f));
    }
    if (lg > 709.0) throw std::overflow_error("pochhammer: overflow");
    return sign * std::exp(lg);
}

namespace detail {

struct SeriesResult {
    LogValue value;
    double abs_err = std::numeric_limits<double>::infinity();
    bool converged = false;
};

/// Sum signed terms given in log form, rescaled by the largest magnitude.
inline SeriesResult sum_log_terms(const std::vector<double>& logt,
                                  const std::vector<int>& sign,
                                  double trunc_err) {
    double lmax = -std::numeric_limits<double>::infinity();
    for (double l : logt) lmax = std::max(lmax, l);
    SeriesResult r;
    if (logt.empty() || lmax == -std::numeric_limits<double>::infinity()) {
        r.value = {};
        r.abs_err = trunc_err;
        r.converged = true;
        return r;
    }
    CompensatedSum s;
    for (std::size_t i = 0; i < logt.size(); ++i)
        if (sign[i] != 0) s.add(sign[i] * std::exp(logt[i] - lmax));
    double total = s.value();
    r.value = (total == 0.0) ? LogValue{}
                             : LogValue{lmax + std::log(std::fabs(total)),
                                        total > 0 ? 1 : -1};
    // rounding floor: eps * largest term * number of terms, plus truncation
    double rnd = std::exp(lmax) * 2.3e-16 * static_cast<double>(logt.size());
    r.abs_err = rnd + trunc_err;
    r.converged = true;
    return r;
}

/// Defining power series of Prabhakar-type sums:
///   sum_s rf(gamma, s)/s! * z^s / Gamma(alpha*s + beta)
/// The optional prefactor exp(log_prefactor) is folded into every term.
inline SeriesResult prabhakar_series(double alpha, double beta, double gamma,
                                     double z, double log_prefactor,
                                     const EvalConfig& cfg) {
    SeriesResult fail;
    if (z == 0.0) {
        LogValue rg = log_recip_gamma(beta);
        if (rg.sign != 0) rg.logabs += log_prefactor;
        return {rg, 0.0, true};
    }
    double logz = std::log(std::fabs(z));
    int sz = z > 0 ? 1 : -1;
    std::vector<double> logt;
    std::vector<int> sgn;
    logt.reserve(64);
    sgn.reserve(64);
    double log_tol = std::log(cfg.abs_tol) + std::log(0.01);
    // For alternating sums the achievable accuracy is eps * largest term; once
    // terms pass exp(55) times the value scale the sum is worthless even in
    // relative terms, so bail out and let the asymptotic regime take over.
    double log_abort = (sz < 0) ? 55.0 + std::max(0.0, log_prefactor)
                                : std::numeric_limits<double>::infinity();
    double log_rf = 0.0;  // log |(gamma)_s / s!|
    double prev = std::numeric_limits<double>::infinity();
    int decreasing = 0;
    for (int s = 0; s < cfg.max_terms; ++s) {
        if (s > 0) {
            double f = gamma + (s - 1);
            if (f == 0.0)  // (gamma)_s vanishes from here on: finite exact sum
                return sum_log_terms(logt, sgn, 0.0);
            log_rf += std::log(std::fabs(f)) - std::log(static_cast<double>(s));
        }
        LogValue rg = log_recip_gamma(alpha * s + beta);
        double lt = log_prefactor + log_rf + s * logz + rg.logabs;
        if (lt > log_abort) return fail;
        int st = rg.sign * ((sz < 0 && (s & 1)) ? -1 : 1);
        logt.push_back(lt);
        sgn.push_back(st);
        if (lt < prev) {
            if (++decreasing >= 2 && lt < log_tol)
                return sum_log_terms(logt, sgn, std::exp(lt));
        } else {
            decreasing = 0;
        }
        prev = lt;
    }
    return fail;  // not converged within max_terms
}

/// Algebraic expansion for z -> -inf:
///   E^gamma_{alpha,beta}(-x) ~ x^-gamma sum_k (-1)^k rf(gamma,k)/k!
///                              * x^-k / Gamma(beta - alpha*(gamma+k))
/// Divergent; truncated at the smallest term.
inline SeriesResult prabhakar_asymptotic(double alpha, double beta, double gamma,
                                         double x, double log_prefactor,
                                         const EvalConfig& cfg) {
    SeriesResult fail;
    if (gamma == 0.0) {
        // E^0 = 1/Gamma(beta) exactly; the asymptotic form is moot
        LogValue rg = log_recip_gamma(beta);
        if (rg.sign != 0) rg.logabs += log_prefactor;
        return {rg, 0.0, true};
    }
    double logx = std::log(x);
    std::vector<double> logt;
    std::vector<int> sgn;
    double log_tol = std::log(cfg.abs_tol) + std::log(0.01);
    double log_rf = 0.0;
    // Term magnitudes follow a smooth envelope modulated by an oscillating
    // |sin| factor from the reflection formula.  Truncation decisions (both
    // the stop-when-small and the terms-started-growing cut) must use the
    // envelope: an individual term can sit near a sin zero while its
    // neighbours, and hence the remainder, are orders of magnitude larger.
    double env_min = std::numeric_limits<double>::infinity();
    std::size_t min_pos = 0;
    int kmax = std::min(cfg.max_terms, 500);
    for (int k = 0; k < kmax; ++k) {
        if (k > 0)
            log_rf += std::log(gamma + (k - 1)) - std::log(static_cast<double>(k));
        double w = beta - alpha * (gamma + k);
        LogValue rg = log_recip_gamma(w);
        double env_rg = (w > 0.0) ? -std::lgamma(w)
                                  : std::lgamma(1.0 - w) - std::log(kPi);
        double base = log_prefactor + log_rf - (gamma + k) * logx;
        double env = base + env_rg;
        if (rg.sign != 0) {
            logt.push_back(base + rg.logabs);
            sgn.push_back(rg.sign * ((k & 1) ? -1 : 1));
        }
        if (env < env_min) {
            env_min = env;
            min_pos = logt.empty() ? 0 : logt.size() - 1;
        }
        if (env < log_tol && !logt.empty())
            return sum_log_terms(logt, sgn, std::exp(env));
        if (env > env_min + 4.6 && !logt.empty()) {
            // sustained divergence: drop everything past the envelope minimum
            logt.resize(min_pos + 1);
            sgn.resize(min_pos + 1);
            return sum_log_terms(logt, sgn, std::exp(env_min));
        }
    }
    return fail;
}

/// Core evaluator shared by mittag_leffler and prabhakar.  Returns the value
/// in log form together with an absolute error estimate.  For z < 0 both the
/// defining series and the asymptotic expansion are attempted and the one
/// with the smaller error estimate wins; each regime reports failure cleanly
/// where it cannot work (series: cancellation blow-up; asymptotic: terms grow
/// before the tolerance is met).
inline SeriesResult prabhakar_core(double alpha, double beta, double gamma,
                                   double z, double log_prefactor,
                                   const EvalConfig& cfg) {
    if (z >= 0.0 || gamma == 0.0)
        return prabhakar_series(alpha, beta, gamma, z, log_prefactor, cfg);
    double x = -z;
    SeriesResult ser = prabhakar_series(alpha, beta, gamma, z, log_prefactor, cfg);
    if (ser.converged && ser.abs_err <= 1e2 * cfg.abs_tol *
                                            (1.0 + std::exp(std::min(700.0, log_prefactor))))
        return ser;  // series already essentially exact
    SeriesResult asy;
    if (x >= 1.25)
        asy = prabhakar_asymptotic(alpha, beta, gamma, x, log_prefactor, cfg);
    if (ser.converged && asy.converged)
        return ser.abs_err <= asy.abs_err ? ser : asy;
    if (ser.converged) return ser;
    if (asy.converged) return asy;
    return ser;
}

}  // namespace detail

namespace detail {

// Accept an evaluation if it is accurate in absolute terms or, failing that,
// in relative terms.  Near the series/asymptotic crossover for alpha close to
// 1 the best either regime can do in double precision is a few times 1e-6
// relative; near sign changes of gamma >= 2 Prabhakar functions only an
// absolute bound is meaningful.  Everything below is non-convergent.
inline bool acceptable(const SeriesResult& r, double abs_floor) {
    if (!r.converged) return false;
    if (r.abs_err <= abs_floor) return true;
    if (r.value.sign != 0 && r.abs_err <= 3e-5 * std::exp(r.value.logabs)) return true;
    return r.abs_err <= 3e-6;
}

}  // namespace detail

/// Three-parameter Prabhakar function E^gamma_{alpha,beta}(z) in log form.
inline LogValue log_prabhakar(double alpha, double beta, double gamma, double z,
                              const EvalConfig& cfg = {}) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("prabhakar: alpha must be in (0,1]");
    if (!(beta > 0.0)) throw std::domain_error("prabhakar: beta must be > 0");
    if (!(gamma >= 0.0)) throw std::domain_error("prabhakar: gamma must be >= 0");
    auto r = detail::prabhakar_core(alpha, beta, gamma, z, 0.0, cfg);
    if (!detail::acceptable(r, std::max(100.0 * cfg.abs_tol, 1e-9)))
        throw non_convergent_error("prabhakar: no regime reached the tolerance");
    return r.value;
}

/// E^gamma_{alpha,beta}(z) = sum_s (gamma)_s z^s / (s! Gamma(alpha s + beta)).
inline double prabhakar(double alpha, double beta, double gamma, double z,
                        const EvalConfig& cfg = {}) {
    return log_prabhakar(alpha, beta, gamma, z, cfg).to_double();
}

/// Two-parameter Mittag-Leffler function E_{alpha,beta}(z).
inline double mittag_leffler(double alpha, double beta, double z,
                             const EvalConfig& cfg = {}) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("mittag_leffler: alpha must be in (0,1]");
    if (!(beta > 0.0)) throw std::domain_error("mittag_leffler: beta must be > 0");
    if (alpha == 1.0 && beta == 1.0) return std::exp(z);
    return prabhakar(alpha, beta, 1.0, z, cfg);
}

/// One-parameter E_alpha(z) = E_{alpha,1}(z).
inline double mittag_leffler(double alpha, double z, const EvalConfig& cfg = {}) {
    return mittag_leffler(alpha, 1.0, z, cfg);
}

/// State-probability building block of renewal counting:
///   x^n * E^{n+1}_{beta, beta n + 1}(-x)
/// evaluated with the x^n prefactor folded into the terms, so it stays finite
/// for any x > 0 and n.  Equals the n-th fractional Poisson probability at
/// dimensionless time x = xi t^beta.
inline double ml_state_term(double beta, double x, unsigned n,
                            const EvalConfig& cfg = {}) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::domain_error("ml_state_term: beta must be in (0,1]");
    if (x < 0.0) throw std::domain_error("ml_state_term: x must be >= 0");
    if (x == 0.0) return n == 0 ? 1.0 : 0.0;
    if (beta == 1.0) {
        // Poisson: exact closed form
        double lg = n * std::log(x) - x - std::lgamma(n + 1.0);
        return std::exp(lg);
    }
    double logpref = n * std::log(x);
    auto r = detail::prabhakar_core(beta, beta * n + 1.0, n + 1.0, -x, logpref, cfg);
    if (!detail::acceptable(r, std::max(100.0 * cfg.abs_tol, 1e-9)))
        throw non_convergent_error("ml_state_term: no regime reached the tolerance");
    double v = r.value.to_double();
    return v < 0.0 ? 0.0 : v;  // clip rounding noise; probabilities are >= 0
}

/// (-1)^n binom(a, n), the u^n coefficient of (1-u)^a, via log-gamma.
/// Exact at n = 0; for integer a and n > a it is 0.
inline double one_minus_u_power_coeff(double a, unsigned n) {
    if (n == 0) return 1.0;
    // (-1)^n binom(a,n) = Gamma(n-a) / (Gamma(-a) Gamma(n+1))
    LogValue rg = log_recip_gamma(-a);
    if (rg.sign == 0) {
        // a is a non-negative integer: finite binomial
        if (a >= 0.0 && n <= static_cast<unsigned>(a)) {
            double lg = std::lgamma(a + 1.0) - std::lgamma(n + 1.0) -
                        std::lgamma(a - n + 1.0);
            return ((n & 1) ? -1.0 : 1.0) * std::exp(lg);
        }
        return 0.0;
    }
    double lg = std::lgamma(static_cast<double>(n) - a) + rg.logabs -
                std::lgamma(n + 1.0);
    return rg.sign * std::exp(lg);
}

/// Tail sum of the coefficients of (1-u)^a beyond index N:
///   sum_{k>N} (-1)^k binom(a,k) = -Gamma(N+1-a) / (Gamma(1-a) Gamma(N+1)),
/// valid for a > 0; zero for nonnegative integer a (finite polynomial).
inline double one_minus_u_power_tail(double a, unsigned N) {
    if (a == 0.0) return 0.0;
    LogValue rg = log_recip_gamma(1.0 - a);
    if (rg.sign == 0) return 0.0;  // positive integer exponent: finite polynomial
    double lg = std::lgamma(static_cast<double>(N) + 1.0 - a) + rg.logabs -
                std::lgamma(static_cast<double>(N) + 1.0);
    return -rg.sign * std::exp(lg);
}

}  // namespace stml
