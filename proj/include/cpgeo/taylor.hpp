#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpgeo/series.hpp"

namespace cpgeo {

struct invalid_bounds_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct singular_expansion_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct step_too_large_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

/// Certified bounds for a right-hand side on a polydisc around the
/// expansion point: time-disc radius a, state-disc radius b, sup norm M of
/// the RHS and sup norm K of each state partial derivative.
struct PolydiscBounds {
    double a;
    double b;
    double M;
    double K;

    bool valid() const {
        auto ok = [](double x) { return x > 0.0 && std::isfinite(x); };
        return ok(a) && ok(b) && ok(M) && ok(K);
    }
};

/// Largest step radius for which a single holomorphic solution element is
/// guaranteed to exist and stay inside the state disc, shrunk by `safety`.
inline double guaranteed_step_radius(const PolydiscBounds& bounds, double safety = 0.9) {
    if (!bounds.valid()) {
        throw invalid_bounds_error("polydisc bounds must be positive and finite");
    }
    if (!(safety > 0.0 && safety < 1.0)) {
        throw std::invalid_argument("safety factor must lie in (0,1)");
    }
    return safety * std::min({bounds.a, bounds.b / bounds.M, 1.0 / bounds.K});
}

/// Local power-series solution of an ODE system at a complex time center.
struct TaylorElement {
    cplx center{};
    std::vector<Jet> components;   // one jet per state dimension
    int order = 0;
    std::optional<double> estimated_radius;  // filled by estimate_radius

    std::size_t dimension() const { return components.size(); }

    std::vector<cplx> state_at_center() const {
        std::vector<cplx> s(components.size());
        for (std::size_t d = 0; d < components.size(); ++d) s[d] = components[d][0];
        return s;
    }
};

/// An ODE right-hand side evaluable on jets: f(t, y, dy_dt) where t is the
/// jet of the time variable at the expansion center.
template <class F>
concept SeriesRhs = requires(F& f, const Jet& t, std::span<const Jet> y, std::span<Jet> out) {
    f(t, y, out);
};

/// Expand the local solution of y' = f(y, t) at `center` to the given
/// order by the standard coefficient recurrence: the degree-(k+1) state
/// coefficient is the degree-k derivative coefficient divided by k+1.
template <SeriesRhs F>
TaylorElement taylor_expand(F&& rhs, std::span<const cplx> state, cplx center, int order) {
    if (order < 1) throw std::invalid_argument("taylor_expand: order must be >= 1");
    const std::size_t dim = state.size();
    const std::size_t len = static_cast<std::size_t>(order) + 1;

    std::vector<Jet> y(dim, Jet(len));
    for (std::size_t d = 0; d < dim; ++d) y[d][0] = state[d];

    // Work on prefixes: the degree-k derivative coefficient only depends on
    // state coefficients of degree <= k.
    std::vector<Jet> yp(dim), fp(dim);
    try {
        for (int k = 0; k < order; ++k) {
            const std::size_t plen = static_cast<std::size_t>(k) + 1;
            for (std::size_t d = 0; d < dim; ++d) {
                Jet j(plen);
                for (std::size_t i = 0; i < plen; ++i) j[i] = y[d][i];
                yp[d] = std::move(j);
                fp[d] = Jet(plen);
            }
            Jet tp = Jet::variable(center, plen);
            rhs(tp, std::span<const Jet>(yp), std::span<Jet>(fp));
            for (std::size_t d = 0; d < dim; ++d) {
                y[d][static_cast<std::size_t>(k) + 1] = fp[d][k] / double(k + 1);
            }
        }
    } catch (const singular_series_error& e) {
        throw singular_expansion_error(e.what());
    }

    TaylorElement el;
    el.center = center;
    el.components = std::move(y);
    el.order = order;
    return el;
}

struct RadiusOptions {
    int min_terms = 8;        // below this order the estimate is "unknown"
    double cap = 3.0;         // estimates above the cap are not trusted
    double underflow = 1e-280;
};

/// Root-test estimate of the convergence radius from the tail
/// coefficients. Returns nullopt ("unknown") when the tail is effectively
/// zero, too short, or the estimate exceeds the cap.
inline std::optional<double> estimate_radius(const TaylorElement& el,
                                             const RadiusOptions& opts = {}) {
    const int n = el.order;
    if (n < opts.min_terms || el.components.empty()) return std::nullopt;

    std::vector<double> mag(static_cast<std::size_t>(n) + 1, 0.0);
    for (const Jet& comp : el.components) {
        for (std::size_t k = 0; k < mag.size(); ++k) {
            mag[k] = std::max(mag[k], std::abs(comp[k]));
        }
    }
    const double scale = std::max(1.0, mag[0]);

    std::vector<double> roots;
    for (int k = (n + 1) / 2; k <= n; ++k) {
        const double m = mag[static_cast<std::size_t>(k)];
        if (m > opts.underflow * scale) {
            roots.push_back(std::pow(m / scale, -1.0 / double(k)));
        }
    }
    if (roots.size() < 3) return std::nullopt;

    std::nth_element(roots.begin(), roots.begin() + roots.size() / 2, roots.end());
    const double est = roots[roots.size() / 2];
    if (!(est > 0.0) || !std::isfinite(est) || est > opts.cap) return std::nullopt;
    return est;
}

/// Evaluate every component of the element at center + dt. When the
/// element carries a radius estimate the step must respect
/// |dt| <= step_fraction * radius.
inline std::vector<cplx> advance(const TaylorElement& el, cplx dt, double step_fraction = 0.5) {
    if (el.estimated_radius && std::abs(dt) > step_fraction * *el.estimated_radius) {
        throw step_too_large_error("advance: |dt| exceeds step_fraction * estimated radius");
    }
    std::vector<cplx> out(el.components.size());
    for (std::size_t d = 0; d < el.components.size(); ++d) out[d] = el.components[d].eval(dt);
    return out;
}

} // namespace cpgeo
