#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cpgeo/path.hpp"
#include "cpgeo/taylor.hpp"

namespace cpgeo {

enum class TraceStatus { ReachedEnd, Escaped, Stalled, Error };

inline const char* to_string(TraceStatus s) {
    switch (s) {
        case TraceStatus::ReachedEnd: return "reached_end";
        case TraceStatus::Escaped: return "escaped";
        case TraceStatus::Stalled: return "stalled";
        case TraceStatus::Error: return "error";
    }
    return "error";
}

struct Sample {
    cplx t;
    std::vector<cplx> y;
};

struct SingularityRecord {
    cplx location;            // element center + estimated radius toward travel
    double radius_at_detection;
};

struct ContinuationOptions {
    int order = 16;
    double tolerance = 1e-12;      // local truncation target, relative to state scale
    double step_fraction = 0.5;    // of the estimated convergence radius
    double safety = 0.8;           // applied to the tolerance-derived step
    std::size_t max_steps = 100000;
    double escape_threshold = 1e12;
    double min_step = 1e-12;
    RadiusOptions radius{};

    // detour handling (continue_real_with_detours)
    bool detours_enabled = true;
    std::vector<double> detour_factors{0.05, 0.1, 0.2};  // x (distance from leg base)
    std::vector<double> detour_radii{};                  // absolute override when nonempty
    int max_detours = 3;
    double realness_tolerance = 1e-9;
    DetourOrientation orientation = DetourOrientation::Upper;
    int arc_points = 16;
    double min_spacing = 1e-3;     // minimum separation of exceptional times

    bool record_samples = true;
};

struct ContinuationTrace {
    std::vector<Sample> samples;
    std::vector<SingularityRecord> singularities;
    std::vector<double> exceptional_real_times;
    TraceStatus status = TraceStatus::Error;
    std::string error_text;
    std::size_t total_steps = 0;

    const Sample& final_sample() const { return samples.back(); }
};

namespace detail {

struct LegOutcome {
    enum Kind { Done, Collapsed, Escaped, StepLimit } kind = Done;
    cplx sing_location{};
    double sing_radius = 0.0;
};

inline double max_abs(std::span<const cplx> y) {
    double m = 0.0;
    for (const cplx& c : y) m = std::max(m, std::abs(c));
    return m;
}

/// March Taylor elements from t to t_to along the straight segment,
/// appending a sample per accepted step.
template <SeriesRhs F>
LegOutcome run_leg(F& rhs, std::vector<cplx>& y, cplx& t, cplx t_to,
                   const ContinuationOptions& o, ContinuationTrace& trace,
                   std::size_t& steps_used) {
    while (true) {
        const cplx to_go = t_to - t;
        const double rem = std::abs(to_go);
        if (rem == 0.0) return {LegOutcome::Done};
        const cplx dir = to_go / rem;

        TaylorElement el;
        try {
            el = taylor_expand(rhs, y, t, o.order);
        } catch (const singular_expansion_error&) {
            return {LegOutcome::Collapsed, t + o.min_step * dir, o.min_step};
        }
        el.estimated_radius = estimate_radius(el, o.radius);
        const double radius_hint = el.estimated_radius.value_or(o.min_step);

        if (max_abs(y) > o.escape_threshold) {
            return {LegOutcome::Escaped, t + radius_hint * dir, radius_hint};
        }

        // step from the tolerance applied to the top two coefficients
        const double scale = std::max(1.0, max_abs(y));
        double h_tol = std::numeric_limits<double>::infinity();
        for (int k = o.order; k >= o.order - 1 && k > 0; --k) {
            double m = 0.0;
            for (const Jet& comp : el.components) {
                m = std::max(m, std::abs(comp[static_cast<std::size_t>(k)]));
            }
            if (m > 0.0) {
                h_tol = std::min(h_tol, std::pow(o.tolerance * scale / m, 1.0 / double(k)));
            }
        }
        h_tol *= o.safety;

        double h = std::min(h_tol, rem);
        if (el.estimated_radius) {
            h = std::min(h, o.step_fraction * *el.estimated_radius * 0.999999);
        }

        if (h < o.min_step && rem > h) {
            return {LegOutcome::Collapsed, t + radius_hint * dir, radius_hint};
        }

        const bool landing = h >= rem;
        const cplx dt = landing ? to_go : dir * h;
        y = advance(el, dt, o.step_fraction);
        t = landing ? t_to : t + dt;
        if (o.record_samples) trace.samples.push_back({t, y});

        if (++steps_used > o.max_steps) return {LegOutcome::StepLimit};
    }
}

inline bool component_real(cplx z, double tol) {
    return std::abs(z.imag()) <= tol * std::max(1.0, std::abs(z));
}

inline bool state_real(std::span<const cplx> y, double tol) {
    for (const cplx& c : y) {
        if (!component_real(c, tol)) return false;
    }
    return true;
}

} // namespace detail

/// Continue the solution of y' = rhs(y, t) from `initial` along the
/// waypoints of `path`. Marches local Taylor elements with steps bounded
/// by both the truncation tolerance and step_fraction times the estimated
/// convergence radius; on blow-up or step collapse records a singularity
/// estimate and stops.
template <SeriesRhs F>
ContinuationTrace continue_along_path(F&& rhs, std::span<const cplx> initial,
                                      const ContinuationPath& path,
                                      const ContinuationOptions& opts = {}) {
    path.validate();
    ContinuationTrace trace;
    std::vector<cplx> y(initial.begin(), initial.end());
    cplx t = path.waypoints.front();
    trace.samples.push_back({t, y});

    std::size_t steps = 0;
    for (std::size_t i = 1; i < path.waypoints.size(); ++i) {
        auto out = detail::run_leg(rhs, y, t, path.waypoints[i], opts, trace, steps);
        trace.total_steps = steps;
        switch (out.kind) {
            case detail::LegOutcome::Done:
                break;
            case detail::LegOutcome::Collapsed:
                trace.singularities.push_back({out.sing_location, out.sing_radius});
                trace.status = TraceStatus::Stalled;
                return trace;
            case detail::LegOutcome::Escaped:
                trace.singularities.push_back({out.sing_location, out.sing_radius});
                trace.status = TraceStatus::Escaped;
                return trace;
            case detail::LegOutcome::StepLimit:
                trace.status = TraceStatus::Stalled;
                trace.error_text = "step budget exhausted";
                return trace;
        }
    }
    trace.total_steps = steps;
    trace.status = TraceStatus::ReachedEnd;
    return trace;
}

/// Continue along the real axis from t = 0 to t_end (either sign). On
/// singularity detection, retry around it with semicircular detours of
/// growing radius until the exit state is real within tolerance; the
/// imaginary parts are then projected away and the singular time is
/// recorded as exceptional. Detour exhaustion ends the run as escaped.
template <SeriesRhs F>
ContinuationTrace continue_real_with_detours(F&& rhs, std::span<const cplx> initial,
                                             double t_end,
                                             const ContinuationOptions& opts = {}) {
    ContinuationTrace trace;
    for (const cplx& c : initial) {
        if (c.imag() != 0.0) {
            trace.status = TraceStatus::Error;
            trace.error_text = "initial state must be real";
            return trace;
        }
    }
    std::vector<cplx> y(initial.begin(), initial.end());
    cplx t = 0.0;
    trace.samples.push_back({t, y});
    if (t_end == 0.0) {
        trace.status = TraceStatus::ReachedEnd;
        return trace;
    }
    const double dir = t_end > 0.0 ? 1.0 : -1.0;
    double base = 0.0;
    std::size_t steps = 0;

    auto detour_radius = [&](int attempt, double span) {
        if (!opts.detour_radii.empty()) {
            const auto& rs = opts.detour_radii;
            const std::size_t i = static_cast<std::size_t>(attempt);
            if (i < rs.size()) return rs[i];
            return rs.back() * std::pow(2.0, double(i - rs.size() + 1));
        }
        const auto& fs = opts.detour_factors;
        const std::size_t i = static_cast<std::size_t>(attempt);
        const double f = i < fs.size() ? fs[i]
                                       : fs.back() * std::pow(2.0, double(i - fs.size() + 1));
        return f * span;
    };

    while (true) {
        auto out = detail::run_leg(rhs, y, t, cplx(t_end), opts, trace, steps);
        trace.total_steps = steps;
        if (out.kind == detail::LegOutcome::Done) {
            trace.status = TraceStatus::ReachedEnd;
            return trace;
        }
        if (out.kind == detail::LegOutcome::StepLimit) {
            trace.status = TraceStatus::Stalled;
            trace.error_text = "step budget exhausted";
            return trace;
        }

        // singularity on the way
        const double t_hat = out.sing_location.real();
        trace.singularities.push_back({out.sing_location, out.sing_radius});
        const TraceStatus bare =
            out.kind == detail::LegOutcome::Escaped ? TraceStatus::Escaped : TraceStatus::Stalled;
        if (!opts.detours_enabled) {
            trace.status = bare;
            return trace;
        }
        const double span = dir * (t_hat - base);
        if (span < opts.min_spacing) {
            trace.status = TraceStatus::Stalled;
            trace.error_text = "singularity within minimum spacing of the continuation base";
            return trace;
        }
        if (!trace.exceptional_real_times.empty() &&
            std::abs(t_hat - trace.exceptional_real_times.back()) < opts.min_spacing) {
            trace.status = TraceStatus::Stalled;
            trace.error_text = "exceptional times closer than the minimum spacing";
            return trace;
        }
        if (dir * (t_end - t_hat) <= opts.min_spacing) {
            // singular point at or just past the horizon: unresolvable within spacing
            trace.exceptional_real_times.push_back(t_hat);
            trace.status = TraceStatus::ReachedEnd;
            trace.error_text = "horizon lies within minimum spacing of a singular time";
            return trace;
        }

        bool flanked = false;
        for (int attempt = 0; attempt < opts.max_detours; ++attempt) {
            const double r = detour_radius(attempt, span);
            const double entry = t_hat - dir * r;
            const double exit = t_hat + dir * r;
            if (dir * (entry - base) < 0.0) break;  // cannot rewind past the base

            // restart from the last recorded real sample at or before entry
            std::size_t restart = trace.samples.size();
            for (std::size_t i = trace.samples.size(); i-- > 0;) {
                const Sample& s = trace.samples[i];
                if (s.t.imag() == 0.0 && dir * (s.t.real() - entry) <= 0.0 &&
                    dir * (s.t.real() - base) >= 0.0) {
                    restart = i;
                    break;
                }
            }
            if (restart == trace.samples.size()) break;

            ContinuationTrace scratch;
            scratch.samples.reserve(256);
            std::vector<cplx> ys = trace.samples[restart].y;
            cplx ts = trace.samples[restart].t;

            ContinuationPath arc = flank(t_hat, r, opts.orientation, opts.arc_points);
            if (dir < 0.0) std::reverse(arc.waypoints.begin(), arc.waypoints.end());

            bool ok = true;
            auto seg = detail::run_leg(rhs, ys, ts, arc.waypoints.front(), opts, scratch, steps);
            ok = seg.kind == detail::LegOutcome::Done;
            for (std::size_t i = 1; ok && i < arc.waypoints.size(); ++i) {
                seg = detail::run_leg(rhs, ys, ts, arc.waypoints[i], opts, scratch, steps);
                ok = seg.kind == detail::LegOutcome::Done;
            }
            trace.total_steps = steps;
            if (ok && detail::state_real(ys, opts.realness_tolerance)) {
                for (cplx& c : ys) c = cplx(c.real(), 0.0);
                // drop the aborted approach beyond the detour entry, then
                // splice in the accepted detour
                while (!trace.samples.empty()) {
                    const Sample& s = trace.samples.back();
                    if (s.t.imag() == 0.0 && dir * (s.t.real() - entry) > 0.0) {
                        trace.samples.pop_back();
                    } else {
                        break;
                    }
                }
                for (auto& s : scratch.samples) trace.samples.push_back(std::move(s));
                if (!trace.samples.empty() && trace.samples.back().t == cplx(exit)) {
                    trace.samples.back().y = ys;
                }
                trace.exceptional_real_times.push_back(t_hat);
                y = ys;
                t = cplx(exit);
                base = exit;
                flanked = true;
                break;
            }
            if (steps > opts.max_steps) {
                trace.status = TraceStatus::Stalled;
                trace.error_text = "step budget exhausted";
                return trace;
            }
        }
        if (!flanked) {
            trace.status = TraceStatus::Escaped;
            trace.error_text = "detour schedule exhausted without a real re-entry";
            return trace;
        }
    }
}

} // namespace cpgeo
