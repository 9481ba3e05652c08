// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "constants.hpp"
#include "errors.hpp"

namespace leoipac {

/// Earth-centered Earth-fixed position in meters.
using EcefVector = Eigen::Vector3d;

struct SatelliteState {
    int id = 0;
    EcefVector position = EcefVector::Zero();
    Eigen::Vector3d velocity = Eigen::Vector3d::Zero(); // m/s
};

/// Orthonormal antenna frame of a satellite. Boresight (z) points at the
/// Earth center, x is the along-track direction, y completes the right-handed
/// triad. Array rows run along x, columns along y.
struct ArrayFrame {
    Eigen::Vector3d x;
    Eigen::Vector3d y;
    Eigen::Vector3d z;
};

/// Line-of-sight quantities between one satellite and one ground point.
///
/// `aod_elevation` is the off-boresight angle and `aod_azimuth` the in-plane
/// angle from the along-track axis, so that (dir_x, dir_y) =
/// sin(aod_elevation) * (cos(aod_azimuth), sin(aod_azimuth)) are the direction
/// cosines of the departure direction along the array axes.
///
/// Doppler follows the range-rate sign: positive while the satellite recedes.
struct LosGeometry {
    double range = 0.0;        // m
    double elevation = 0.0;    // rad, satellite elevation seen from the ground point
    double delay = 0.0;        // s
    double doppler = 0.0;      // Hz
    double aod_azimuth = 0.0;  // rad
    double aod_elevation = 0.0; // rad
    double dir_x = 0.0;
    double dir_y = 0.0;
};

inline double circular_speed(double radius_m) { return std::sqrt(kEarthMu / radius_m); }

inline ArrayFrame array_frame(const SatelliteState& sat) {
    const double r = sat.position.norm();
    if (!(r > 0.0))
        throw DegenerateGeometry("satellite at the Earth center");
    ArrayFrame f;
    f.z = -sat.position / r;
    const Eigen::Vector3d along = sat.velocity - sat.velocity.dot(f.z) * f.z;
    const double n = along.norm();
    if (!(n > 1e-9 * std::max(1.0, sat.velocity.norm())))
        throw DegenerateGeometry("satellite velocity is radial; along-track axis undefined");
    f.x = along / n;
    f.y = f.z.cross(f.x);
    return f;
}

/// Unit vector from the satellite towards the ground point and the range.
inline std::pair<Eigen::Vector3d, double> line_of_sight(const SatelliteState& sat, const EcefVector& ue) {
    const Eigen::Vector3d d = ue - sat.position;
    const double range = d.norm();
    if (!(range > 0.0))
        throw DegenerateGeometry("satellite and ground point coincide");
    return {d / range, range};
}

inline LosGeometry los_geometry(const SatelliteState& sat, const EcefVector& ue, double carrier_hz) {
    const auto [u, range] = line_of_sight(sat, ue);
    const ArrayFrame f = array_frame(sat);

    LosGeometry g;
    g.range = range;
    g.delay = range / kSpeedOfLight;
    g.doppler = -sat.velocity.dot(u) / kSpeedOfLight * carrier_hz;

    const double ue_norm = ue.norm();
    if (ue_norm > 0.0) {
        const double s = std::clamp(-u.dot(ue / ue_norm), -1.0, 1.0);
        g.elevation = std::asin(s);
    }

    g.dir_x = u.dot(f.x);
    g.dir_y = u.dot(f.y);
    const double dz = u.dot(f.z);
    g.aod_elevation = std::atan2(std::hypot(g.dir_x, g.dir_y), dz);
    g.aod_azimuth = std::atan2(g.dir_y, g.dir_x);
    return g;
}

/// Round-trip propagation offset applied to uplink frames.
inline double timing_advance(const SatelliteState& sat, const EcefVector& ue) {
    return 2.0 * (ue - sat.position).norm() / kSpeedOfLight;
}

struct DopplerEnvelope {
    double max_doppler_hz;
    double max_rate_hz_s;
};

/// Worst-case Doppler (satellite on the horizon) and Doppler rate (zenith
/// pass) for a circular orbit at `altitude_m`.
inline DopplerEnvelope max_doppler_and_rate(double altitude_m, double carrier_hz) {
    if (altitude_m < kMinLeoAltitude || altitude_m > kMaxLeoAltitude)
        throw DegenerateInput("altitude outside the LEO band [160 km, 2000 km]");
    const double r = kEarthRadius + altitude_m;
    const double v = circular_speed(r);
    return {v / kSpeedOfLight * carrier_hz * (kEarthRadius / r),
            v * v / (altitude_m * kSpeedOfLight) * carrier_hz};
}

/// Rotates position and velocity about the orbit normal by the circular-orbit
/// angular rate times dt.
inline SatelliteState propagate_circular_orbit(const SatelliteState& state, double dt) {
    const double r = state.position.norm();
    const Eigen::Vector3d h = state.position.cross(state.velocity);
    const double hn = h.norm();
    if (!(hn > 0.0))
        throw DegenerateGeometry("orbit normal undefined");
    const double omega = circular_speed(r) / r;
    const Eigen::AngleAxisd rot(omega * dt, h / hn);
    SatelliteState out = state;
    out.position = rot * state.position;
    out.velocity = rot * state.velocity;
    return out;
}

/// Checks the SatelliteState invariants: LEO radius band and a speed within
/// 5% of the circular speed.
inline bool is_valid_leo_state(const SatelliteState& s) {
    const double r = s.position.norm();
    if (!std::isfinite(r) || r < kEarthRadius + kMinLeoAltitude || r > kEarthRadius + kMaxLeoAltitude)
        return false;
    const double vc = circular_speed(r);
    return std::abs(s.velocity.norm() - vc) <= 0.05 * vc;
}

/// Point on the spherical Earth at geodetic-free latitude/longitude (rad)
/// and height above the sphere (m).
inline EcefVector spherical_to_ecef(double lat, double lon, double height = 0.0) {
    const double r = kEarthRadius + height;
    return {r * std::cos(lat) * std::cos(lon), r * std::cos(lat) * std::sin(lon), r * std::sin(lat)};
}

} // namespace leoipac
