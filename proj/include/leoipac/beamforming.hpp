// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "channel.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace leoipac {

/// Phase-only analog weights, ||w|| = 1 and |w_n| = 1/sqrt(N).
///
/// The received signal is y = h^T w x (no conjugation of the channel), so the
/// matched weights carry the conjugate phases of the channel.
class Beamformer {
public:
    /// Builds weights exp(j*phase_n)/sqrt(N).
    static Beamformer from_phases(const Eigen::VectorXd& phases) {
        const auto n = phases.size();
        if (n == 0)
            throw DegenerateInput("beamformer needs at least one element");
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        Eigen::VectorXcd w(n);
        for (Eigen::Index i = 0; i < n; ++i)
            w[i] = std::polar(scale, phases[i]);
        return Beamformer(std::move(w));
    }

    const Eigen::VectorXcd& weights() const { return weights_; }
    Eigen::Index size() const { return weights_.size(); }

private:
    explicit Beamformer(Eigen::VectorXcd w) : weights_(std::move(w)) {}
    Eigen::VectorXcd weights_;
};

struct LinkResult {
    double snr_db = 0.0;
    double spectral_efficiency = 0.0; // bit/s/Hz
};

/// Phase-only matched filter to a channel estimate.
inline Beamformer conjugate_beamformer(const Eigen::VectorXcd& channel_estimate) {
    if (channel_estimate.size() == 0 || channel_estimate.cwiseAbs().maxCoeff() == 0.0)
        throw DegenerateInput("channel estimate is zero");
    Eigen::VectorXd phases(channel_estimate.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases[i] = -std::arg(channel_estimate[i]);
    return Beamformer::from_phases(phases);
}

/// Beam towards the LoS direction of a noisy UE position. The position error
/// is isotropic Gaussian with RMS norm `pos_sigma_m`.
inline Beamformer location_based_beamformer(const EcefVector& ue, double pos_sigma_m, const SatelliteState& sat,
                                            const ArrayGeometry& array, double carrier_hz, Rng& rng) {
    if (!(pos_sigma_m >= 0.0))
        throw DegenerateInput("position uncertainty must be non-negative");
    const double axis_sigma = pos_sigma_m / std::sqrt(3.0);
    EcefVector prior = ue;
    for (int k = 0; k < 3; ++k)
        prior[k] += axis_sigma * standard_normal(rng);
    const LosGeometry g = los_geometry(sat, prior, carrier_hz);
    const Eigen::VectorXcd a = steering_vector(array, g.aod_azimuth, g.aod_elevation);
    Eigen::VectorXd phases(a.size());
    for (Eigen::Index i = 0; i < phases.size(); ++i)
        phases[i] = -std::arg(a[i]);
    return Beamformer::from_phases(phases);
}

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }

/// Thermal noise power in dBm over `bandwidth_hz`.
inline double noise_power_dbm(double noise_psd_dbm_hz, double bandwidth_hz) {
    return noise_psd_dbm_hz + 10.0 * std::log10(bandwidth_hz);
}

/// Beamforming gain |h^T w|^2 in linear units.
inline double beamforming_gain(const Eigen::VectorXcd& gains, const Beamformer& bf) {
    return std::norm(gains.cwiseProduct(bf.weights()).sum());
}

inline LinkResult evaluate_link(const ChannelRealization& true_channel, const Beamformer& bf, double tx_power_dbm,
                                double noise_psd_dbm_hz, double bandwidth_hz) {
    if (!(bandwidth_hz > 0.0))
        throw DegenerateInput("bandwidth must be positive");
    if (true_channel.gains.size() != bf.size())
        throw DegenerateInput("beamformer and channel sizes differ");
    const double noise_w = dbm_to_watt(noise_psd_dbm_hz) * bandwidth_hz;
    const double snr = dbm_to_watt(tx_power_dbm) * beamforming_gain(true_channel.gains, bf) / noise_w;
    LinkResult r;
    r.snr_db = snr > 0.0 ? 10.0 * std::log10(snr) : -std::numeric_limits<double>::infinity();
    r.spectral_efficiency = std::log2(1.0 + snr);
    return r;
}

enum class BeamformingMode { outdated_csi, location_based };

/// Single satellite, single UE downlink for the spectral efficiency sweep.
struct SeSetup {
    SatelliteState sat;
    EcefVector ue = EcefVector::Zero();
    ArrayGeometry array = ArrayGeometry::square(20);
    double carrier_hz = 28e9;
    double rician_k = 3.0;
    double amplitude = 1.0;
    double tx_power_dbm = 60.0;
    double noise_psd_dbm_hz = -174.0;
    double bandwidth_hz = 240e6;
};

struct SePoint {
    double error_level = 0.0;
    double mean_se = 0.0;
    double stderr_se = 0.0;
};

/// SE of one trial. The channel draw depends only on (seed, trial) so every
/// error level and both modes see the same channels.
inline double se_trial(const SeSetup& setup, double error_level, BeamformingMode mode, std::uint64_t seed,
                       std::size_t error_index, std::size_t trial) {
    Rng channel_rng = derive_stream(seed, {0, trial});
    Rng error_rng = derive_stream(seed, {1 + static_cast<std::uint64_t>(mode), error_index, trial});

    const LosGeometry g = los_geometry(setup.sat, setup.ue, setup.carrier_hz);
    const ChannelRealization ch = draw_rician_channel(g, setup.array, setup.rician_k, setup.amplitude, channel_rng);

    if (mode == BeamformingMode::outdated_csi) {
        const ChannelRealization stale = age_channel(ch, error_rng);
        const Eigen::VectorXcd estimate = perturb_channel_estimate(stale, error_level, error_rng);
        return evaluate_link(ch, conjugate_beamformer(estimate), setup.tx_power_dbm, setup.noise_psd_dbm_hz,
                             setup.bandwidth_hz)
            .spectral_efficiency;
    }
    const Beamformer bf =
        location_based_beamformer(setup.ue, error_level, setup.sat, setup.array, setup.carrier_hz, error_rng);
    return evaluate_link(ch, bf, setup.tx_power_dbm, setup.noise_psd_dbm_hz, setup.bandwidth_hz)
        .spectral_efficiency;
}

/// Mean spectral efficiency per error level. For outdated CSI the level is the
/// estimation error ratio; for location-based beamforming it is the RMS
/// position uncertainty in meters.
inline std::vector<SePoint> se_sweep(const SeSetup& setup, std::span<const double> error_grid, BeamformingMode mode,
                                     std::size_t trials, std::uint64_t seed, unsigned workers = 1) {
    if (error_grid.empty())
        throw ConfigError("error grid is empty", "error_grid");
    if (trials < 1)
        throw ConfigError("at least one trial is required", "trials");

    const std::size_t n_err = error_grid.size();
    std::vector<double> se(n_err * trials);
    parallel_for(n_err * trials, workers, [&](std::size_t k) {
        const std::size_t e = k / trials;
        const std::size_t t = k % trials;
        se[k] = se_trial(setup, error_grid[e], mode, seed, e, t);
    });

    std::vector<SePoint> out;
    out.reserve(n_err);
    for (std::size_t e = 0; e < n_err; ++e) {
        double sum = 0.0;
        for (std::size_t t = 0; t < trials; ++t)
            sum += se[e * trials + t];
        const double mean = sum / static_cast<double>(trials);
        double ss = 0.0;
        for (std::size_t t = 0; t < trials; ++t) {
            const double d = se[e * trials + t] - mean;
            ss += d * d;
        }
        const double stderr_se =
            trials > 1 ? std::sqrt(ss / static_cast<double>(trials - 1) / static_cast<double>(trials)) : 0.0;
        out.push_back({error_grid[e], mean, stderr_se});
    }
    return out;
}

} // namespace leoipac
