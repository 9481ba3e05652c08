// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "channel.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "random.hpp"

namespace leoipac {

enum class TxMode { cooperative, non_cooperative };

inline const char* to_string(TxMode m) {
    return m == TxMode::cooperative ? "cooperative" : "non_cooperative";
}

/// Diagonal noise covariance of one satellite's observation tuple
/// (delay, Doppler, direction cosines of the AoD along the array rows and
/// columns). A missing direction variance means that axis is unobserved.
struct ObservationNoise {
    double var_delay = 1.0;   // s^2
    double var_doppler = 1.0; // Hz^2
    std::optional<double> var_dir_x;
    std::optional<double> var_dir_y;

    bool has_angles() const { return var_dir_x.has_value() || var_dir_y.has_value(); }

    /// Number of observation rows this noise model describes.
    int rows() const { return 2 + (var_dir_x ? 1 : 0) + (var_dir_y ? 1 : 0); }

    /// Inverse variances in row order.
    Eigen::VectorXd precisions() const {
        Eigen::VectorXd p(rows());
        int k = 0;
        p[k++] = 1.0 / var_delay;
        p[k++] = 1.0 / var_doppler;
        if (var_dir_x)
            p[k++] = 1.0 / *var_dir_x;
        if (var_dir_y)
            p[k++] = 1.0 / *var_dir_y;
        return p;
    }

    ObservationNoise scaled(double variance_factor) const {
        ObservationNoise n = *this;
        n.var_delay *= variance_factor;
        n.var_doppler *= variance_factor;
        if (n.var_dir_x)
            *n.var_dir_x *= variance_factor;
        if (n.var_dir_y)
            *n.var_dir_y *= variance_factor;
        return n;
    }
};

/// SINR of satellite `s`. Non-cooperative satellites leak `xcorr` of their
/// power into each other's correlator output; cooperative ones are orthogonal.
inline double effective_sinr(std::size_t s, std::span<const double> received_powers, double noise_w, TxMode mode,
                             double xcorr) {
    if (s >= received_powers.size())
        throw DegenerateInput("satellite index out of range");
    if (!(noise_w > 0.0))
        throw DegenerateInput("noise power must be positive");
    if (mode == TxMode::cooperative)
        return received_powers[s] / noise_w;
    double interference = 0.0;
    for (std::size_t k = 0; k < received_powers.size(); ++k)
        if (k != s)
            interference += received_powers[k];
    return received_powers[s] / (noise_w + xcorr * interference);
}

/// Variances of the delay, Doppler and direction estimates at a given SINR.
///
/// Delay uses the RMS bandwidth of a flat spectrum (B/sqrt(12)), Doppler the
/// RMS duration of a rectangular window (T/sqrt(12)). A direction cosine
/// along an axis with M elements (total N) has variance
/// 6 / ((2*pi*d)^2 * sinr * N * (M^2 - 1)), which is 6/pi^2 / (...) at
/// half-wavelength spacing.
inline ObservationNoise observation_noise(double sinr, double bandwidth_hz, double coherent_time_s,
                                          const ArrayGeometry& array, bool single_antenna) {
    if (!(sinr > 0.0))
        throw DegenerateInput("SINR must be positive");
    if (!(bandwidth_hz > 0.0) || !(coherent_time_s > 0.0))
        throw DegenerateInput("bandwidth and coherent time must be positive");

    const double beta = bandwidth_hz / std::sqrt(12.0);
    const double t_eff = coherent_time_s / std::sqrt(12.0);
    ObservationNoise n;
    n.var_delay = 1.0 / (8.0 * kPi * kPi * beta * beta * sinr);
    n.var_doppler = 1.0 / (8.0 * kPi * kPi * t_eff * t_eff * sinr);
    if (single_antenna)
        return n;

    validate(array);
    const double total = array.size();
    const double k = 2.0 * kPi * array.spacing_wavelengths;
    const double c_ang = 6.0 / (k * k);
    auto axis_var = [&](int m) -> std::optional<double> {
        if (m < 2)
            return std::nullopt;
        return c_ang / (sinr * total * (static_cast<double>(m) * m - 1.0));
    };
    n.var_dir_x = axis_var(array.n_rows);
    n.var_dir_y = axis_var(array.n_cols);
    return n;
}

/// Noiseless observation tuple (delay, Doppler, dir_x, dir_y).
inline Eigen::Vector4d observation_vector(const SatelliteState& sat, const EcefVector& ue, double carrier_hz) {
    const LosGeometry g = los_geometry(sat, ue, carrier_hz);
    return {g.delay, g.doppler, g.dir_x, g.dir_y};
}

/// Gradients of (delay, Doppler, dir_x, dir_y) with respect to the UE
/// position. With u the unit vector from satellite to UE and r the range:
/// delay' = u/c, Doppler' = -f/c * v^T (I - uu^T) / r and
/// dir' = axis^T (I - uu^T) / r.
inline Eigen::Matrix<double, 4, 3> position_jacobian(const LosGeometry& geom, const SatelliteState& sat,
                                                     const EcefVector& ue, double carrier_hz) {
    const auto [u, range] = line_of_sight(sat, ue);
    if (!(geom.range > 0.0))
        throw DegenerateGeometry("zero range");
    const ArrayFrame f = array_frame(sat);
    const Eigen::Matrix3d proj = (Eigen::Matrix3d::Identity() - u * u.transpose()) / range;

    Eigen::Matrix<double, 4, 3> j;
    j.row(0) = u.transpose() / kSpeedOfLight;
    j.row(1) = -carrier_hz / kSpeedOfLight * sat.velocity.transpose() * proj;
    j.row(2) = f.x.transpose() * proj;
    j.row(3) = f.y.transpose() * proj;
    return j;
}

/// Rows of the full 4-row tuple that `noise` observes.
inline std::vector<int> observed_rows(const ObservationNoise& noise) {
    std::vector<int> rows{0, 1};
    if (noise.var_dir_x)
        rows.push_back(2);
    if (noise.var_dir_y)
        rows.push_back(3);
    return rows;
}

/// 3x3 Fisher information about the UE position, in 1/m^2.
struct Fim3 {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();

    Fim3& operator+=(const Fim3& o) {
        m += o.m;
        return *this;
    }

    bool is_symmetric(double rel_tol = 1e-9) const {
        const double scale = std::max(m.cwiseAbs().maxCoeff(), std::numeric_limits<double>::min());
        return (m - m.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
    }

    bool is_psd(double rel_tol = 1e-9) const {
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (m + m.transpose()));
        return es.eigenvalues().minCoeff() >= -rel_tol * std::abs(m.trace());
    }
};

/// Information contributed by one satellite's observations.
inline Fim3 satellite_fim(const SatelliteState& sat, const EcefVector& ue, double carrier_hz,
                          const ObservationNoise& noise) {
    const LosGeometry g = los_geometry(sat, ue, carrier_hz);
    const Eigen::Matrix<double, 4, 3> j = position_jacobian(g, sat, ue, carrier_hz);
    const auto rows = observed_rows(noise);
    const Eigen::VectorXd prec = noise.precisions();
    Fim3 f;
    for (std::size_t k = 0; k < rows.size(); ++k) {
        const Eigen::RowVector3d r = j.row(rows[k]);
        f.m += prec[static_cast<Eigen::Index>(k)] * r.transpose() * r;
    }
    return f;
}

/// Radio parameters shared by all satellites of a positioning scenario.
struct RfConfig {
    double carrier_hz = 28e9;
    double bandwidth_hz = 240e6;
    double tx_power_dbm = 60.0;
    double noise_psd_dbm_hz = -174.0;
    double coherent_time_s = 1e-3;
    double xcorr = 0.5;
    AttenuationConfig attenuation;
};

/// Per-satellite observation noise at the UE. Each satellite steers its
/// beam at the true UE direction, so its received power carries the full
/// array gain (1 for single-antenna satellites). Pilot energy is integrated
/// coherently over B*T samples for the desired and the co-channel signals
/// alike, while thermal noise enters as N0*B.
inline std::vector<ObservationNoise> link_noise(std::span<const SatelliteState> sats, const EcefVector& ue,
                                                TxMode mode, const ArrayGeometry& array, bool single_antenna,
                                                const RfConfig& rf) {
    if (sats.empty())
        throw DegenerateInput("at least one satellite is required");
    AttenuationConfig mean_env = rf.attenuation;
    mean_env.shadow_sigma_db = 0.0;
    Rng unused(0);

    const double processing_gain = rf.bandwidth_hz * rf.coherent_time_s;
    const double array_gain = single_antenna ? 1.0 : static_cast<double>(array.size());
    const double p_tx = std::pow(10.0, (rf.tx_power_dbm - 30.0) / 10.0);
    const double noise_w = std::pow(10.0, (rf.noise_psd_dbm_hz - 30.0) / 10.0) * rf.bandwidth_hz;

    std::vector<double> powers;
    powers.reserve(sats.size());
    for (const auto& s : sats) {
        const LosGeometry g = los_geometry(s, ue, rf.carrier_hz);
        const LinkBudget lb = large_scale_loss(g.range, g.elevation, rf.carrier_hz, mean_env, unused);
        powers.push_back(processing_gain * p_tx * array_gain * std::pow(10.0, -lb.total_db / 10.0));
    }

    std::vector<ObservationNoise> out;
    out.reserve(sats.size());
    for (std::size_t s = 0; s < sats.size(); ++s) {
        const double sinr = effective_sinr(s, powers, noise_w, mode, rf.xcorr);
        out.push_back(observation_noise(sinr, rf.bandwidth_hz, rf.coherent_time_s, array, single_antenna));
    }
    return out;
}

inline Fim3 fim_from_noise(std::span<const SatelliteState> sats, const EcefVector& ue, double carrier_hz,
                           std::span<const ObservationNoise> noise) {
    if (noise.size() != sats.size())
        throw DegenerateInput("one noise model per satellite is required");
    Fim3 total;
    for (std::size_t s = 0; s < sats.size(); ++s)
        total += satellite_fim(sats[s], ue, carrier_hz, noise[s]);
    return total;
}

/// Position FIM summed over satellites: sum_s J_s^T Lambda_s^-1 J_s.
inline Fim3 position_fim(std::span<const SatelliteState> sats, const EcefVector& ue, TxMode mode,
                         const ArrayGeometry& array, bool single_antenna, const RfConfig& rf) {
    const auto noise = link_noise(sats, ue, mode, array, single_antenna, rf);
    return fim_from_noise(sats, ue, rf.carrier_hz, noise);
}

/// Root-trace of the inverse FIM in meters, or nullopt when the information
/// is singular (smallest eigenvalue below 1e-12 of the largest).
inline std::optional<double> position_crb(const Fim3& fim) {
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(0.5 * (fim.m + fim.m.transpose()));
    const Eigen::Vector3d ev = es.eigenvalues();
    const double largest = ev.maxCoeff();
    if (!(largest > 0.0) || ev.minCoeff() < 1e-12 * largest)
        return std::nullopt;
    return std::sqrt((1.0 / ev.array()).sum());
}

struct CrbRow {
    std::string config; // SA-C, MA-C or MA-NC
    int satellites = 0;
    int array_n = 0;
    std::optional<double> crb_m;
};

/// CRB over array sizes N x N and satellite counts, for single-antenna
/// cooperative (SA-C), multi-antenna cooperative (MA-C) and multi-antenna
/// non-cooperative (MA-NC) transmission. SA rows do not depend on N; they are
/// computed once per S and repeated along the N axis.
template <typename Layout>
std::vector<CrbRow> crb_sweep(std::span<const int> n_grid, std::span<const int> s_values, const EcefVector& ue,
                              double altitude_m, const RfConfig& rf, double spacing_wavelengths, Layout&& layout) {
    if (n_grid.empty() || s_values.empty())
        throw ConfigError("CRB sweep grids must be non-empty", n_grid.empty() ? "crb_n_grid" : "crb_s_values");
    std::vector<CrbRow> rows;
    for (int s : s_values) {
        const std::vector<SatelliteState> sats = layout(s, altitude_m, ue);
        const auto sa = position_crb(position_fim(sats, ue, TxMode::cooperative, ArrayGeometry::single(), true, rf));
        for (int n : n_grid)
            rows.push_back({"SA-C", s, n, sa});
        for (int n : n_grid) {
            const ArrayGeometry a{n, n, spacing_wavelengths};
            rows.push_back({"MA-C", s, n, position_crb(position_fim(sats, ue, TxMode::cooperative, a, false, rf))});
        }
        for (int n : n_grid) {
            const ArrayGeometry a{n, n, spacing_wavelengths};
            rows.push_back(
                {"MA-NC", s, n, position_crb(position_fim(sats, ue, TxMode::non_cooperative, a, false, rf))});
        }
    }
    return rows;
}

} // namespace leoipac
