#pragma once

// Shared quadrature utilities: adaptive GSL integration, composite
// Gauss-Legendre panels, and incomplete-gamma wrappers.

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_gamma.h>

namespace stml {

class quadrature_error : public std::runtime_error {
  public:
    quadrature_error(const std::string& what, double achieved)
        : std::runtime_error(what + " (achieved abs error " +
                             std::to_string(achieved) + ")") {}
};

namespace detail {

struct GslFn {
    const std::function<double(double)>* f;
    static double call(double x, void* p) {
        return (*static_cast<const GslFn*>(p)->f)(x);
    }
};

inline double gsl_adaptive(const std::function<double(double)>& f, double a,
                           double b, double tol) {
    static bool handler_off = [] {
        gsl_set_error_handler_off();
        return true;
    }();
    (void)handler_off;
    gsl_integration_workspace* ws = gsl_integration_workspace_alloc(4000);
    GslFn wrap{&f};
    gsl_function g;
    g.function = &GslFn::call;
    g.params = &wrap;
    double result = 0.0, abserr = 0.0;
    int status = gsl_integration_qags(&g, a, b, tol, tol, 4000, ws, &result, &abserr);
    gsl_integration_workspace_free(ws);
    if (status != 0 && abserr > 100.0 * tol * std::max(1.0, std::fabs(result)))
        throw quadrature_error("adaptive quadrature failed", abserr);
    return result;
}

/// unnormalized upper incomplete gamma Gamma(a, x)
inline double upper_incomplete_gamma(double a, double x) {
    return gsl_sf_gamma_inc(a, x);
}

// 16-point Gauss-Legendre nodes/weights on [-1, 1]
inline const std::vector<std::pair<double, double>>& gl16() {
    static const std::vector<std::pair<double, double>> nw = {
        {-0.9894009349916499, 0.0271524594117541},
        {-0.9445750230732326, 0.0622535239386479},
        {-0.8656312023878318, 0.0951585116824928},
        {-0.7554044083550030, 0.1246289712555339},
        {-0.6178762444026438, 0.1495959888165767},
        {-0.4580167776572274, 0.1691565193950025},
        {-0.2816035507792589, 0.1826034150449236},
        {-0.0950125098376374, 0.1894506104550685},
        {0.0950125098376374, 0.1894506104550685},
        {0.2816035507792589, 0.1826034150449236},
        {0.4580167776572274, 0.1691565193950025},
        {0.6178762444026438, 0.1495959888165767},
        {0.7554044083550030, 0.1246289712555339},
        {0.8656312023878318, 0.0951585116824928},
        {0.9445750230732326, 0.0622535239386479},
        {0.9894009349916499, 0.0271524594117541},
    };
    return nw;
}

template <typename F>
void gl16_panel(double a, double b, const F& f) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    for (auto [x, w] : gl16()) f(mid + half * x, half * w);
}

}  // namespace detail
}  // namespace stml
