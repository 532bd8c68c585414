#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cpgeo/series.hpp"

namespace cpgeo {

struct invalid_radius_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct invalid_path_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

enum class DetourOrientation { Upper, Lower };

/// A polyline in the complex time plane along which a solution is to be
/// continued. The first waypoint is the (real) start time.
struct ContinuationPath {
    std::vector<cplx> waypoints;

    void validate() const {
        if (waypoints.empty()) throw invalid_path_error("path needs at least one waypoint");
        if (waypoints.front().imag() != 0.0) {
            throw invalid_path_error("path must start at a real time");
        }
        for (std::size_t i = 1; i < waypoints.size(); ++i) {
            if (waypoints[i] == waypoints[i - 1]) {
                throw invalid_path_error("consecutive waypoints must be distinct");
            }
        }
    }
};

/// Semicircular detour around a real time: `arc_points` waypoints on the
/// circle |t - t_singular| = detour_radius in the chosen half plane,
/// entering at t_singular - detour_radius and exiting at
/// t_singular + detour_radius.
inline ContinuationPath flank(double t_singular, double detour_radius,
                              DetourOrientation orientation = DetourOrientation::Upper,
                              int arc_points = 16) {
    if (!(detour_radius > 0.0)) throw invalid_radius_error("detour radius must be positive");
    if (arc_points < 3) throw std::invalid_argument("flank needs at least 3 arc points");

    ContinuationPath path;
    path.waypoints.reserve(static_cast<std::size_t>(arc_points));
    const double sign = orientation == DetourOrientation::Upper ? 1.0 : -1.0;
    for (int k = 0; k < arc_points; ++k) {
        const double theta = std::numbers::pi * (1.0 - double(k) / double(arc_points - 1));
        path.waypoints.push_back(cplx(t_singular) +
                                 detour_radius * std::polar(1.0, sign * theta));
    }
    // pin the endpoints to the real axis exactly
    path.waypoints.front() = cplx(t_singular - detour_radius);
    path.waypoints.back() = cplx(t_singular + detour_radius);
    return path;
}

} // namespace cpgeo
