// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "fim.hpp"
#include "geometry.hpp"
#include "parallel.hpp"
#include "random.hpp"

namespace leoipac {

/// Measurements from one satellite. Direction cosines are present exactly
/// when the matching noise entry observes them.
struct ObservationRecord {
    double delay = 0.0;
    double doppler = 0.0;
    std::optional<double> dir_x;
    std::optional<double> dir_y;

    Eigen::VectorXd as_vector() const {
        Eigen::VectorXd z(2 + (dir_x ? 1 : 0) + (dir_y ? 1 : 0));
        int k = 0;
        z[k++] = delay;
        z[k++] = doppler;
        if (dir_x)
            z[k++] = *dir_x;
        if (dir_y)
            z[k++] = *dir_y;
        return z;
    }
};

struct ObservationSet {
    std::vector<ObservationRecord> records;
    std::vector<ObservationNoise> noise;
    std::vector<SatelliteState> assumed_sats; // ephemeris used by the estimator
    double carrier_hz = 28e9;

    void validate() const {
        if (records.empty())
            throw DegenerateInput("observation set is empty");
        if (records.size() != noise.size() || records.size() != assumed_sats.size())
            throw DegenerateInput("observation set needs one record, noise model and satellite per satellite");
        for (std::size_t s = 0; s < records.size(); ++s) {
            const auto& n = noise[s];
            if (!(n.var_delay > 0.0) || !(n.var_doppler > 0.0) || (n.var_dir_x && !(*n.var_dir_x > 0.0)) ||
                (n.var_dir_y && !(*n.var_dir_y > 0.0)))
                throw DegenerateInput("noise variances must be positive");
            if (records[s].dir_x.has_value() != n.var_dir_x.has_value() ||
                records[s].dir_y.has_value() != n.var_dir_y.has_value())
                throw DegenerateInput("angle observations inconsistent with the noise model");
        }
    }
};

/// Noisy observations of the true geometry. The assumed ephemeris defaults to
/// the true one; callers substitute a mismatched copy.
inline ObservationSet simulate_observations(const EcefVector& true_ue, std::span<const SatelliteState> true_sats,
                                            std::span<const ObservationNoise> noise, double carrier_hz, Rng& rng) {
    if (noise.size() != true_sats.size())
        throw DegenerateInput("one noise model per satellite is required");
    ObservationSet obs;
    obs.carrier_hz = carrier_hz;
    obs.assumed_sats.assign(true_sats.begin(), true_sats.end());
    obs.noise.assign(noise.begin(), noise.end());
    for (std::size_t s = 0; s < true_sats.size(); ++s) {
        const LosGeometry g = los_geometry(true_sats[s], true_ue, carrier_hz);
        const ObservationNoise& n = noise[s];
        ObservationRecord r;
        r.delay = g.delay + std::sqrt(n.var_delay) * standard_normal(rng);
        r.doppler = g.doppler + std::sqrt(n.var_doppler) * standard_normal(rng);
        if (n.var_dir_x)
            r.dir_x = g.dir_x + std::sqrt(*n.var_dir_x) * standard_normal(rng);
        if (n.var_dir_y)
            r.dir_y = g.dir_y + std::sqrt(*n.var_dir_y) * standard_normal(rng);
        obs.records.push_back(r);
    }
    return obs;
}

struct NllValue {
    double cost = 0.0;
    Eigen::Vector3d gradient = Eigen::Vector3d::Zero();
    Eigen::Matrix3d gauss_newton_hessian = Eigen::Matrix3d::Zero();
};

/// Gaussian negative log-likelihood (up to a constant) of UE position `p`
/// against the observations, evaluated with the assumed satellite states.
inline NllValue nll(const EcefVector& p, const ObservationSet& obs) {
    NllValue out;
    for (std::size_t s = 0; s < obs.records.size(); ++s) {
        const SatelliteState& sat = obs.assumed_sats[s];
        const LosGeometry g = los_geometry(sat, p, obs.carrier_hz);
        const Eigen::Vector4d h{g.delay, g.doppler, g.dir_x, g.dir_y};
        const Eigen::Matrix<double, 4, 3> j = position_jacobian(g, sat, p, obs.carrier_hz);
        const auto rows = observed_rows(obs.noise[s]);
        const Eigen::VectorXd z = obs.records[s].as_vector();
        const Eigen::VectorXd prec = obs.noise[s].precisions();
        for (std::size_t k = 0; k < rows.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const double r = z[kk] - h[rows[k]];
            const Eigen::RowVector3d jr = j.row(rows[k]);
            out.cost += 0.5 * prec[kk] * r * r;
            out.gradient -= prec[kk] * r * jr.transpose();
            out.gauss_newton_hessian += prec[kk] * jr.transpose() * jr;
        }
    }
    return out;
}

struct EstimationResult {
    EcefVector position = EcefVector::Zero();
    double cost = std::numeric_limits<double>::infinity();
    int iterations = 0;
    bool converged = false;
    double gradient_norm = std::numeric_limits<double>::infinity(); // sqrt(g^T H^-1 g)
};

struct SolverOptions {
    int max_iterations = 100;
    double gradient_tolerance = 1e-6;
    double step_tolerance_m = 1e-4;
    int max_backtracks = 40;
};

namespace detail {

inline double safe_cost(const EcefVector& p, const ObservationSet& obs) {
    try {
        return nll(p, obs).cost;
    } catch (const DegenerateGeometry&) {
        return std::numeric_limits<double>::infinity();
    }
}

inline double newton_decrement(const NllValue& v) {
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(v.gauss_newton_hessian);
    if (ldlt.info() != Eigen::Success)
        return v.gradient.norm();
    const double d = v.gradient.dot(ldlt.solve(v.gradient));
    return std::sqrt(std::max(d, 0.0));
}

} // namespace detail

/// Gauss-Newton with Armijo backtracking from a single start point.
/// `cost_trace`, when given, receives the cost after every accepted step.
inline EstimationResult ml_estimate(const ObservationSet& obs, const EcefVector& init, const SolverOptions& opt = {},
                                    std::vector<double>* cost_trace = nullptr) {
    obs.validate();
    EstimationResult res;
    EcefVector p = init;
    NllValue v;
    try {
        v = nll(p, obs);
    } catch (const DegenerateGeometry&) {
        res.position = p;
        return res;
    }
    if (cost_trace)
        cost_trace->push_back(v.cost);

    for (int it = 0; it < opt.max_iterations; ++it) {
        res.iterations = it + 1;
        const double decrement = detail::newton_decrement(v);
        if (decrement < opt.gradient_tolerance) {
            res.converged = true;
            break;
        }
        const Eigen::LDLT<Eigen::Matrix3d> ldlt(v.gauss_newton_hessian);
        Eigen::Vector3d step = -ldlt.solve(v.gradient);
        if (ldlt.info() != Eigen::Success || !step.allFinite())
            step = -v.gradient;
        const double slope = v.gradient.dot(step);

        double alpha = 1.0;
        double trial_cost = std::numeric_limits<double>::infinity();
        int bt = 0;
        for (; bt < opt.max_backtracks; ++bt) {
            trial_cost = detail::safe_cost(p + alpha * step, obs);
            if (trial_cost <= v.cost + 1e-4 * alpha * slope)
                break;
            alpha *= 0.5;
        }
        if (bt == opt.max_backtracks) {
            // No decrease possible along the GN direction: at a minimum up to
            // round-off when the step is already tiny.
            res.converged = (alpha * step).norm() < opt.step_tolerance_m || step.norm() < opt.step_tolerance_m;
            break;
        }
        p += alpha * step;
        v = nll(p, obs);
        if (cost_trace)
            cost_trace->push_back(v.cost);
        if ((alpha * step).norm() < opt.step_tolerance_m) {
            res.converged = true;
            break;
        }
    }
    res.position = p;
    res.cost = v.cost;
    res.gradient_norm = detail::newton_decrement(v);
    return res;
}

/// Start grid for the multi-start solver: `nx` x `ny` points spread over a
/// square patch of side `extent_m` on the Earth surface, centered below the
/// mean assumed satellite position.
struct MultiStartGrid {
    int nx = 5;
    int ny = 5;
    double extent_m = 200e3;
    double altitude_m = 0.0;
};

inline std::vector<EcefVector> start_points(const ObservationSet& obs, const MultiStartGrid& grid) {
    Eigen::Vector3d centroid = Eigen::Vector3d::Zero();
    for (const auto& s : obs.assumed_sats)
        centroid += s.position;
    centroid /= static_cast<double>(obs.assumed_sats.size());
    const Eigen::Vector3d up = centroid.normalized();
    Eigen::Vector3d east = Eigen::Vector3d::UnitZ().cross(up);
    if (east.norm() < 1e-9)
        east = Eigen::Vector3d::UnitX();
    east.normalize();
    const Eigen::Vector3d north = up.cross(east);
    const double radius = kEarthRadius + grid.altitude_m;
    const Eigen::Vector3d center = up * radius;

    auto offset = [&](int i, int n) { return n > 1 ? grid.extent_m * (static_cast<double>(i) / (n - 1) - 0.5) : 0.0; };
    std::vector<EcefVector> pts;
    for (int i = 0; i < grid.nx; ++i)
        for (int j = 0; j < grid.ny; ++j) {
            const Eigen::Vector3d q = center + offset(i, grid.nx) * east + offset(j, grid.ny) * north;
            pts.push_back(q.normalized() * radius);
        }
    return pts;
}

/// Runs the single-start solver from every grid point and keeps the lowest
/// final cost. `converged` is false only when no start converged.
inline EstimationResult ml_estimate(const ObservationSet& obs, const MultiStartGrid& grid,
                                    const SolverOptions& opt = {}) {
    EstimationResult best;
    bool any_converged = false;
    for (const auto& init : start_points(obs, grid)) {
        EstimationResult r = ml_estimate(obs, init, opt);
        if (r.converged && (!any_converged || r.cost < best.cost)) {
            best = r;
            any_converged = true;
        } else if (!any_converged && r.cost < best.cost) {
            best = r;
        }
    }
    return best;
}

/// Displaces every satellite by exactly `magnitude_m` in a uniformly random
/// direction. Velocities are kept.
inline std::vector<SatelliteState> apply_orbit_mismatch(std::span<const SatelliteState> sats, double magnitude_m,
                                                        Rng& rng) {
    if (!(magnitude_m >= 0.0))
        throw DegenerateInput("mismatch magnitude must be non-negative");
    std::vector<SatelliteState> out(sats.begin(), sats.end());
    if (magnitude_m == 0.0)
        return out;
    for (auto& s : out)
        s.position += magnitude_m * random_unit_vector(rng);
    return out;
}

/// Inputs of the RMSE-versus-observation-accuracy sweep.
struct RmseSetup {
    std::vector<SatelliteState> sats;
    EcefVector ue = EcefVector::Zero();
    double carrier_hz = 28e9;
    /// Noise per satellite at any reference level; only the ratios of the
    /// Doppler and direction deviations to the delay deviation are used.
    std::vector<ObservationNoise> reference_noise;
    MultiStartGrid starts;
};

struct RmseRow {
    double mismatch_m = 0.0;
    double delay_sigma_ns = 0.0;
    double rmse_m = 0.0;
    std::optional<double> crb_m;
    std::size_t trials = 0;
};

/// Noise of every satellite rescaled so its delay deviation equals
/// `delay_sigma_s`, with Doppler and direction deviations scaled by the same
/// factor.
inline std::vector<ObservationNoise> noise_at_delay_sigma(std::span<const ObservationNoise> reference,
                                                          double delay_sigma_s) {
    std::vector<ObservationNoise> out;
    out.reserve(reference.size());
    for (const auto& n : reference)
        out.push_back(n.scaled(delay_sigma_s * delay_sigma_s / n.var_delay));
    return out;
}

/// Squared position error of one trial. Mismatch directions depend on
/// (seed, mismatch level, trial) and measurement noise on (seed, trial), so
/// every grid point reuses the same random draws.
inline double rmse_trial(const RmseSetup& setup, std::span<const ObservationNoise> noise, double mismatch_m,
                         std::uint64_t seed, std::size_t mismatch_index, std::size_t trial) {
    Rng mismatch_rng = derive_stream(seed, {10, mismatch_index, trial});
    Rng noise_rng = derive_stream(seed, {11, trial});
    ObservationSet obs = simulate_observations(setup.ue, setup.sats, noise, setup.carrier_hz, noise_rng);
    obs.assumed_sats = apply_orbit_mismatch(setup.sats, mismatch_m, mismatch_rng);
    const EstimationResult est = ml_estimate(obs, setup.starts);
    return (est.position - setup.ue).squaredNorm();
}

inline std::vector<RmseRow> rmse_sweep(const RmseSetup& setup, std::span<const double> delay_sigma_grid_ns,
                                       std::span<const double> mismatch_levels_m, std::size_t trials,
                                       std::uint64_t seed, unsigned workers = 1) {
    if (delay_sigma_grid_ns.empty() || mismatch_levels_m.empty())
        throw ConfigError("RMSE sweep grids must be non-empty",
                          delay_sigma_grid_ns.empty() ? "rmse_delay_sigmas_ns" : "rmse_mismatch_m");
    if (trials < 1)
        throw ConfigError("at least one trial is required", "rmse_trials");
    if (setup.reference_noise.size() != setup.sats.size())
        throw DegenerateInput("one reference noise model per satellite is required");

    const std::size_t n_sig = delay_sigma_grid_ns.size();
    const std::size_t n_mis = mismatch_levels_m.size();
    std::vector<std::vector<ObservationNoise>> noise(n_sig);
    std::vector<std::optional<double>> crb(n_sig);
    for (std::size_t i = 0; i < n_sig; ++i) {
        noise[i] = noise_at_delay_sigma(setup.reference_noise, delay_sigma_grid_ns[i] * 1e-9);
        crb[i] = position_crb(fim_from_noise(setup.sats, setup.ue, setup.carrier_hz, noise[i]));
    }

    std::vector<double> sq(n_mis * n_sig * trials);
    parallel_for(sq.size(), workers, [&](std::size_t k) {
        const std::size_t t = k % trials;
        const std::size_t i = (k / trials) % n_sig;
        const std::size_t m = k / (trials * n_sig);
        sq[k] = rmse_trial(setup, noise[i], mismatch_levels_m[m], seed, m, t);
    });

    std::vector<RmseRow> rows;
    for (std::size_t m = 0; m < n_mis; ++m)
        for (std::size_t i = 0; i < n_sig; ++i) {
            double sum = 0.0;
            for (std::size_t t = 0; t < trials; ++t)
                sum += sq[(m * n_sig + i) * trials + t];
            rows.push_back({mismatch_levels_m[m], delay_sigma_grid_ns[i],
                            std::sqrt(sum / static_cast<double>(trials)), crb[i], trials});
        }
    return rows;
}

} // namespace leoipac
