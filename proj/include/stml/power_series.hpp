#pragma once

// Truncated one-sided power series ("upper triangular circulant" kernels).
// A kernel stores the coefficients M_{0,k} of u^k for k = 0..N; entries below
// the diagonal of the corresponding circulant matrix are identically zero.
//
// Alongside the coefficients, ops propagate the singular (Puiseux) expansion
// of the generating function around u = 1 in powers of v = 1-u.  That
// expansion determines the coefficient tail beyond the truncation order
// analytically, which is what makes tail-corrected normalization checks at
// 1e-9 possible for fat-tailed kernels.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "stml/special_functions.hpp"

namespace stml {

/// Expansion sum_j c_j v^{e_j} of a generating function around u=1 (v = 1-u),
/// truncated at exponent e_cap.  Exponent 0 is the value at u=1.
class PuiseuxSeries {
  public:
    static constexpr double kExponentCap = 12.0;
    static constexpr double kExponentMerge = 1e-9;

    PuiseuxSeries() = default;
    static PuiseuxSeries constant(double c) {
        PuiseuxSeries p;
        p.known_ = true;
        if (c != 0.0) p.terms_.push_back({0.0, c});
        return p;
    }
    static PuiseuxSeries single(double exponent, double coeff) {
        PuiseuxSeries p;
        p.known_ = true;
        p.add(exponent, coeff);
        return p;
    }
    static PuiseuxSeries unknown() { return PuiseuxSeries(); }

    bool known() const { return known_; }
    const std::vector<std::pair<double, double>>& terms() const { return terms_; }

    double value_at_one() const {  // constant term
        for (auto& [e, c] : terms_)
            if (e < kExponentMerge) return c;
        return 0.0;
    }

    void add(double exponent, double coeff) {
        if (exponent > kExponentCap || coeff == 0.0) return;
        for (auto& [e, c] : terms_) {
            if (std::fabs(e - exponent) < kExponentMerge) {
                c += coeff;
                return;
            }
        }
        terms_.push_back({exponent, coeff});
        std::sort(terms_.begin(), terms_.end());
    }

    PuiseuxSeries scaled(double s) const {
        PuiseuxSeries p = *this;
        for (auto& [e, c] : p.terms_) c *= s;
        return p;
    }

    PuiseuxSeries plus_constant(double s) const {
        PuiseuxSeries p = *this;
        p.add(0.0, s);
        return p;
    }

    friend PuiseuxSeries operator+(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        if (!a.known_ || !b.known_) return unknown();
        PuiseuxSeries p = a;
        for (auto& [e, c] : b.terms_) p.add(e, c);
        return p;
    }

    friend PuiseuxSeries operator*(const PuiseuxSeries& a, const PuiseuxSeries& b) {
        if (!a.known_ || !b.known_) return unknown();
        PuiseuxSeries p;
        p.known_ = true;
        for (auto& [ea, ca] : a.terms_)
            for (auto& [eb, cb] : b.terms_) p.add(ea + eb, ca * cb);
        return p;
    }

    /// Composition sum_m coeff(m) * (P - P00)^m where P00 is the constant
    /// term; coeff(m) are the Taylor coefficients of an outer function at P00.
    PuiseuxSeries compose_entire(const std::function<double(unsigned)>& coeff) const {
        if (!known_) return unknown();
        PuiseuxSeries q = *this;
        // strip constant term
        PuiseuxSeries frac;
        frac.known_ = true;
        for (auto& [e, c] : q.terms_)
            if (e >= kExponentMerge) frac.add(e, c);
        double e_min = frac.terms_.empty() ? kExponentCap + 1.0 : frac.terms_.front().first;
        PuiseuxSeries out = constant(coeff(0));
        PuiseuxSeries pw = constant(1.0);
        for (unsigned m = 1; m * e_min <= kExponentCap; ++m) {
            pw = pw * frac;
            if (pw.terms_.empty()) break;
            out = out + pw.scaled(coeff(m));
            if (m > 400) break;
        }
        return out;
    }

    PuiseuxSeries reciprocal() const {
        double c0 = value_at_one();
        if (!known_ || c0 == 0.0) return unknown();
        return compose_entire([c0](unsigned m) {
            return ((m & 1) ? -1.0 : 1.0) * std::pow(c0, -(static_cast<double>(m) + 1.0));
        });
    }

    PuiseuxSeries pow(double mu) const {
        double c0 = value_at_one();
        if (!known_ || c0 <= 0.0) return unknown();
        return compose_entire([c0, mu](unsigned m) {
            // binom(mu, m) * c0^(mu - m)
            double b = 1.0;
            for (unsigned k = 0; k < m; ++k) b *= (mu - k) / (k + 1.0);
            return b * std::pow(c0, mu - static_cast<double>(m));
        });
    }

    /// Sum of the u-coefficients beyond index N implied by this expansion.
    /// The term sequence c_j T_{e_j}(N) is asymptotic in j (the 1/Gamma
    /// factors in T eventually out-grow the N^{-e_j} decay), so it is
    /// truncated at its smallest term.
    double tail_beyond(unsigned N) const {
        if (!known_) throw std::logic_error("PuiseuxSeries: tail requested but unknown");
        std::vector<double> vals;
        vals.reserve(terms_.size());
        for (auto& [e, c] : terms_) vals.push_back(c * one_minus_u_power_tail(e, N));
        // find the global minimum nonzero magnitude; once terms grow past it
        // the expansion has turned divergent for this N
        double best = std::numeric_limits<double>::infinity();
        std::size_t cut = vals.size();
        for (std::size_t j = 0; j < vals.size(); ++j) {
            double a = std::fabs(vals[j]);
            if (a == 0.0) continue;
            if (a < best) {
                best = a;
                cut = j;
            }
        }
        CompensatedSum s;
        for (std::size_t j = 0; j <= cut && j < vals.size(); ++j) s.add(vals[j]);
        return s.value();
    }

  private:
    bool known_ = false;
    std::vector<std::pair<double, double>> terms_;  // (exponent, coeff), sorted
};

/// Truncated coefficient sequence of an upper triangular circulant operator.
struct CirculantKernel {
    std::vector<double> coeffs;     // coefficient of u^k at index k
    PuiseuxSeries singular;         // expansion around u=1, when known
    bool stochastic = false;        // coeffs >= 0, sum + tail == 1

    CirculantKernel() = default;
    explicit CirculantKernel(std::size_t order)
        : coeffs(order + 1, 0.0) {}

    std::size_t order() const { return coeffs.size() - 1; }

    /// analytic estimate of sum_{k>N} coefficients
    double tail_sum() const { return singular.tail_beyond(static_cast<unsigned>(order())); }
    bool tail_known() const { return singular.known(); }
};

inline CirculantKernel delta_kernel(std::size_t N) {
    CirculantKernel k(N);
    k.coeffs[0] = 1.0;
    k.singular = PuiseuxSeries::constant(1.0);
    return k;
}

/// Kernel of the k-step forward shift: 1 at index k.  Generating function
/// u^k = (1-v)^k, a polynomial with zero tail.
inline CirculantKernel shift_kernel(std::size_t N, std::size_t k = 1) {
    CirculantKernel r(N);
    if (k <= N) r.coeffs[k] = 1.0;
    PuiseuxSeries p = PuiseuxSeries::constant(1.0);
    double b = 1.0;
    for (std::size_t j = 1; j <= k && j <= 32; ++j) {
        b *= -(static_cast<double>(k - j + 1)) / static_cast<double>(j);
        p.add(static_cast<double>(j), b);
    }
    r.singular = (k <= 32) ? p : PuiseuxSeries::unknown();
    return r;
}

/// c_k = (-1)^k binom(alpha, k): coefficients of (1-u)^alpha, via the stable
/// recurrence c_0 = 1, c_k = c_{k-1} (k-1-alpha)/k.  Exact for alpha = 1.
inline CirculantKernel frac_power_one_minus_u(double alpha, std::size_t N) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::domain_error("frac_power_one_minus_u: alpha must be in (0,1]");
    CirculantKernel r(N);
    double c = 1.0;
    r.coeffs[0] = 1.0;
    for (std::size_t k = 1; k <= N; ++k) {
        c *= (static_cast<double>(k) - 1.0 - alpha) / static_cast<double>(k);
        r.coeffs[k] = c;
    }
    r.singular = PuiseuxSeries::single(alpha, 1.0);
    return r;
}

inline CirculantKernel convolve(const CirculantKernel& a, const CirculantKernel& b) {
    if (a.order() != b.order())
        throw std::invalid_argument("convolve: truncation orders differ");
    std::size_t N = a.order();
    CirculantKernel r(N);
    for (std::size_t k = 0; k <= N; ++k) {
        CompensatedSum s;
        for (std::size_t j = 0; j <= k; ++j) s.add(a.coeffs[j] * b.coeffs[k - j]);
        r.coeffs[k] = s.value();
    }
    r.singular = a.singular * b.singular;
    return r;
}

inline CirculantKernel add_scalar(const CirculantKernel& a, double s) {
    CirculantKernel r = a;
    r.coeffs[0] += s;
    r.singular = a.singular.plus_constant(s);
    return r;
}

inline CirculantKernel scale(const CirculantKernel& a, double s) {
    CirculantKernel r = a;
    for (double& c : r.coeffs) c *= s;
    r.singular = a.singular.scaled(s);
    return r;
}

/// Power-series division: convolve(a, result) = delta up to the truncation
/// order (standard recurrence b_0 = 1/a_0, b_k = -(1/a_0) sum a_j b_{k-j}).
inline CirculantKernel reciprocal(const CirculantKernel& a) {
    if (std::fabs(a.coeffs[0]) < 1e-300)
        throw std::domain_error("reciprocal: constant term is (numerically) zero");
    std::size_t N = a.order();
    CirculantKernel r(N);
    double inv = 1.0 / a.coeffs[0];
    r.coeffs[0] = inv;
    for (std::size_t k = 1; k <= N; ++k) {
        CompensatedSum s;
        for (std::size_t j = 1; j <= k; ++j) s.add(a.coeffs[j] * r.coeffs[k - j]);
        r.coeffs[k] = -inv * s.value();
    }
    r.singular = a.singular.reciprocal();
    return r;
}

/// log of a series with positive constant term (l' = a'/a recurrence).
inline CirculantKernel series_log(const CirculantKernel& a) {
    if (!(a.coeffs[0] > 0.0))
        throw std::domain_error("series_log: constant term must be positive");
    std::size_t N = a.order();
    CirculantKernel r(N);
    r.coeffs[0] = std::log(a.coeffs[0]);
    for (std::size_t n = 1; n <= N; ++n) {
        CompensatedSum s;
        for (std::size_t k = 1; k < n; ++k)
            s.add(static_cast<double>(k) * r.coeffs[k] * a.coeffs[n - k]);
        r.coeffs[n] = (static_cast<double>(n) * a.coeffs[n] - s.value()) /
                      (static_cast<double>(n) * a.coeffs[0]);
    }
    r.singular = PuiseuxSeries::unknown();
    return r;
}

/// exp of a series (q' = a' q recurrence).
inline CirculantKernel series_exp(const CirculantKernel& a) {
    std::size_t N = a.order();
    CirculantKernel r(N);
    r.coeffs[0] = std::exp(a.coeffs[0]);
    for (std::size_t n = 1; n <= N; ++n) {
        CompensatedSum s;
        for (std::size_t k = 1; k <= n; ++k)
            s.add(static_cast<double>(k) * a.coeffs[k] * r.coeffs[n - k]);
        r.coeffs[n] = s.value() / static_cast<double>(n);
    }
    r.singular = PuiseuxSeries::unknown();
    return r;
}

/// a^mu = exp(mu log a) in the coefficient algebra; the Puiseux expansion is
/// carried through exactly.
inline CirculantKernel kernel_pow(const CirculantKernel& a, double mu) {
    CirculantKernel r = series_exp(scale(series_log(a), mu));
    r.singular = a.singular.pow(mu);
    return r;
}

/// Taylor coefficients of exp about a0 (all positive): exp(a0)/m!.
struct ExpTaylor {
    double a0 = 0.0;
    static constexpr bool is_exponential = true;
    LogValue log_coeff(unsigned m) const { return {a0 - std::lgamma(m + 1.0), 1}; }
    static double coeff_at_zero(unsigned m) {
        return std::exp(-std::lgamma(m + 1.0));
    }
};

/// Taylor coefficients of E_beta about a0 <= 0.  The m-th derivative of the
/// Mittag-Leffler function is m! E^{m+1}_{beta, beta m + 1}, so the
/// coefficients are Prabhakar values; they are nonnegative on the negative
/// half line by complete monotonicity.
struct MittagLefflerTaylor {
    double beta;
    double a0;
    EvalConfig cfg{};
    static constexpr bool is_exponential = false;
    LogValue log_coeff(unsigned m) const {
        LogValue v = log_prabhakar(beta, beta * m + 1.0, m + 1.0, a0, cfg);
        if (v.sign < 0) return {};  // clip rounding noise at zero
        return v;
    }
    double coeff_at_zero(unsigned m) const {
        return log_recip_gamma(beta * m + 1.0).to_double();
    }
};

namespace detail {
// The singular expansion of f(a(u)) computed from Taylor coefficients of f
// at zero is valid only when a(1) = 0 (the case for all generator-built
// process generating functions).
inline bool vanishes_at_one(const PuiseuxSeries& p) {
    return p.known() && std::fabs(p.value_at_one()) < 1e-12;
}
}  // namespace detail

/// exp of a kernel argument via the exact O(N^2) differential recurrence.
inline CirculantKernel compose_exp(const CirculantKernel& a) {
    CirculantKernel r = series_exp(a);
    r.singular = detail::vanishes_at_one(a.singular)
                     ? a.singular.compose_entire(&ExpTaylor::coeff_at_zero)
                     : PuiseuxSeries::unknown();
    return r;
}

/**
 * Term-by-term composition sum_m f_m (a - a_0 delta)^{*m} where f_m are the
 * Taylor coefficients of the outer scalar function about a_0 = a.coeffs[0].
 *
 * Since (a - a_0 delta) has zero constant term, its m-th convolution power
 * vanishes below index m and the sum terminates after at most order() steps.
 * Powers are kept rescaled so intermediates never overflow; contributions are
 * assembled per-index with compensated accumulation.  For the process
 * generating functions used here every contribution is nonnegative, so there
 * is no cancellation across m.
 */
template <typename F>
CirculantKernel compose_scalar(const F& f, const CirculantKernel& a,
                               const EvalConfig& cfg = {}) {
    const std::size_t N = a.order();
    std::vector<double> w = a.coeffs;
    w[0] = 0.0;

    std::vector<CompensatedSum> acc(N + 1);
    acc[0].add(f.log_coeff(0).to_double());

    std::vector<double> power(N + 1, 0.0);
    power[0] = 1.0;
    double log_scale = 0.0;
    int quiet = 0;
    for (std::size_t m = 1; m <= N; ++m) {
        std::vector<double> next(N + 1, 0.0);
        double maxabs = 0.0;
        for (std::size_t n = m; n <= N; ++n) {
            CompensatedSum s;
            for (std::size_t k = 1; k <= n - (m - 1); ++k)
                s.add(w[k] * power[n - k]);
            next[n] = s.value();
            maxabs = std::max(maxabs, std::fabs(next[n]));
        }
        if (maxabs == 0.0) break;
        if (maxabs > 1e250) {
            for (double& v : next) v /= 1e250;
            log_scale += std::log(1e250);
        }
        power.swap(next);

        LogValue fm = f.log_coeff(static_cast<unsigned>(m));
        double maxc = 0.0;
        if (fm.sign != 0) {
            for (std::size_t n = m; n <= N; ++n) {
                if (power[n] == 0.0) continue;
                double lc = fm.logabs + log_scale + std::log(std::fabs(power[n]));
                double c = fm.sign * (power[n] > 0 ? 1 : -1) * std::exp(lc);
                acc[n].add(c);
                maxc = std::max(maxc, std::fabs(c));
            }
        }
        if (maxc < cfg.abs_tol * 0.01) {
            if (++quiet >= 3) break;
        } else {
            quiet = 0;
        }
        if (m >= static_cast<std::size_t>(cfg.max_terms))
            throw non_convergent_error("compose_scalar: max_terms exceeded");
    }

    CirculantKernel r(N);
    for (std::size_t n = 0; n <= N; ++n) r.coeffs[n] = acc[n].value();
    r.singular = detail::vanishes_at_one(a.singular)
                     ? a.singular.compose_entire(
                           [&f](unsigned m) { return f.coeff_at_zero(m); })
                     : PuiseuxSeries::unknown();
    return r;
}

}  // namespace stml
