// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "constants.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace leoipac {

/// Uniform planar array, rows along the along-track axis of the satellite
/// antenna frame and columns along the cross-track axis.
struct ArrayGeometry {
    int n_rows = 1;
    int n_cols = 1;
    double spacing_wavelengths = 0.5;

    int size() const { return n_rows * n_cols; }

    static ArrayGeometry square(int n, double spacing = 0.5) { return {n, n, spacing}; }
    static ArrayGeometry single() { return {1, 1, 0.5}; }
};

inline void validate(const ArrayGeometry& a) {
    if (a.n_rows < 1 || a.n_cols < 1)
        throw DegenerateInput("array dimensions must be positive");
    if (!(a.spacing_wavelengths > 0.0))
        throw DegenerateInput("array spacing must be positive");
}

enum class ScintillationBranch { none, ionospheric, tropospheric };

/// Parameters of the large-scale attenuation chain. Every term beyond free
/// space loss defaults to off (zero dB).
struct AttenuationConfig {
    double shadow_sigma_db = 0.0;
    bool los_condition = true;
    double clutter_zenith_db = 0.0;     // used only when los_condition is false
    bool atmospheric_enabled = false;
    double atmospheric_zenith_db = 0.0;
    double ionospheric_scintillation_db = 0.0;
    double tropospheric_scintillation_db = 0.0;
    double penetration_db = 0.0;
};

struct LinkBudget {
    double fspl_db = 0.0;
    double shadow_db = 0.0;
    double clutter_db = 0.0;
    double atmospheric_db = 0.0;
    double scintillation_db = 0.0;
    double penetration_db = 0.0;
    double total_db = 0.0;
    ScintillationBranch scintillation_branch = ScintillationBranch::none;

    /// Linear amplitude gain of the path for 0 dBi element gains.
    double amplitude() const { return std::pow(10.0, -total_db / 20.0); }
};

inline double free_space_path_loss_db(double range_m, double carrier_hz) {
    return 20.0 * std::log10(4.0 * kPi * range_m * carrier_hz / kSpeedOfLight);
}

/// Draws one realization of the large-scale loss. Elevation-dependent terms
/// scale their zenith value by 1/sin(elevation).
inline LinkBudget large_scale_loss(double range_m, double elevation_rad, double carrier_hz,
                                   const AttenuationConfig& env, Rng& rng) {
    if (!(range_m > 0.0) || !(carrier_hz > 0.0))
        throw DegenerateInput("range and carrier must be positive");

    LinkBudget lb;
    lb.fspl_db = free_space_path_loss_db(range_m, carrier_hz);

    std::normal_distribution<double> shadow(0.0, 1.0);
    lb.shadow_db = env.shadow_sigma_db * shadow(rng);

    const double sin_el = std::sin(elevation_rad);
    if (!env.los_condition && env.clutter_zenith_db != 0.0) {
        if (!(sin_el > 0.0))
            throw BelowHorizon("clutter loss requested below the horizon");
        lb.clutter_db = env.clutter_zenith_db / sin_el;
    }

    if (env.atmospheric_enabled) {
        if (!(elevation_rad > 0.0))
            throw BelowHorizon("atmospheric absorption requested below the horizon");
        const bool negligible = carrier_hz < 10e9 && elevation_rad >= 10.0 * kPi / 180.0;
        if (!negligible)
            lb.atmospheric_db = env.atmospheric_zenith_db / sin_el;
    }

    if (carrier_hz < 6e9) {
        lb.scintillation_branch = ScintillationBranch::ionospheric;
        lb.scintillation_db = env.ionospheric_scintillation_db;
    } else {
        lb.scintillation_branch = ScintillationBranch::tropospheric;
        lb.scintillation_db = env.tropospheric_scintillation_db;
    }

    lb.penetration_db = env.penetration_db;
    lb.total_db = lb.fspl_db + lb.shadow_db + lb.clutter_db + lb.atmospheric_db + lb.scintillation_db +
                  lb.penetration_db;
    return lb;
}

/// Planar array response, row-major: entry (m, n) carries the phase
/// 2*pi*d*(m*sin(el)*cos(az) + n*sin(el)*sin(az)).
inline Eigen::VectorXcd steering_vector(const ArrayGeometry& array, double az, double el) {
    validate(array);
    const double kx = 2.0 * kPi * array.spacing_wavelengths * std::sin(el) * std::cos(az);
    const double ky = 2.0 * kPi * array.spacing_wavelengths * std::sin(el) * std::sin(az);
    Eigen::VectorXcd a(array.size());
    for (int m = 0; m < array.n_rows; ++m)
        for (int n = 0; n < array.n_cols; ++n)
            a[m * array.n_cols + n] = std::polar(1.0, kx * m + ky * n);
    return a;
}

/// Rician flat-fading channel over the array elements.
struct ChannelRealization {
    Eigen::VectorXcd gains;
    Eigen::VectorXcd los_part;
    Eigen::VectorXcd nlos_part;
    double rician_k = 0.0;
    double amplitude = 1.0;

    /// Recomputes `gains` from the LoS/NLoS parts.
    void assemble() {
        const double w_los = std::sqrt(rician_k / (rician_k + 1.0));
        const double w_nlos = std::sqrt(1.0 / (rician_k + 1.0));
        gains = amplitude * (w_los * los_part + w_nlos * nlos_part);
    }
};

inline ChannelRealization draw_rician_channel(const LosGeometry& geom, const ArrayGeometry& array,
                                              double k_linear, double amplitude, Rng& rng) {
    if (!(k_linear >= 0.0) || !(amplitude > 0.0))
        throw DegenerateInput("Rician factor must be >= 0 and amplitude > 0");
    ChannelRealization ch;
    ch.rician_k = k_linear;
    ch.amplitude = amplitude;
    ch.los_part = steering_vector(array, geom.aod_azimuth, geom.aod_elevation);
    ch.nlos_part = complex_normal_vector(rng, ch.los_part.size());
    ch.assemble();
    return ch;
}

/// Outdated copy of a channel: same LoS part, independently redrawn NLoS.
inline ChannelRealization age_channel(const ChannelRealization& ch, Rng& rng) {
    ChannelRealization out = ch;
    out.nlos_part = complex_normal_vector(rng, ch.los_part.size());
    out.assemble();
    return out;
}

/// Adds i.i.d. complex Gaussian error whose total variance is
/// err_ratio * ||gains||^2.
inline Eigen::VectorXcd perturb_channel_estimate(const ChannelRealization& ch, double err_ratio, Rng& rng) {
    if (!(err_ratio >= 0.0))
        throw DegenerateInput("error ratio must be non-negative");
    const auto n = ch.gains.size();
    if (err_ratio == 0.0)
        return ch.gains;
    const double per_entry = err_ratio * ch.gains.squaredNorm() / static_cast<double>(n);
    return ch.gains + complex_normal_vector(rng, n, per_entry);
}

} // namespace leoipac
