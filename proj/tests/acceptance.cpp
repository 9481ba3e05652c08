// SPDX-License-Identifier: Apache-2.0
//
// Acceptance gate. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails.
//
//   acceptance [--workers N]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <string>
#include <vector>

#include <leoipac/leoipac.hpp>

#include "test_util.hpp"

using namespace leoipac;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            if (!detail.empty())
                detail += "; ";
            detail += what;
        }
    }
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

double crb_of(const std::vector<CrbRow>& rows, const std::string& config, int s, int n) {
    for (const auto& r : rows)
        if (r.config == config && r.satellites == s && r.array_n == n)
            return r.crb_m ? *r.crb_m : std::nan("");
    return std::nan("");
}

Outcome doppler_check() {
    Outcome o;
    const auto d = max_doppler_and_rate(800e3, 30e9);
    o.require(d.max_doppler_hz >= 620e3 && d.max_doppler_hz <= 700e3,
              fmt("max Doppler %.1f Hz outside [620, 700] kHz", d.max_doppler_hz));
    o.require(d.max_rate_hz_s >= 5e3 && d.max_rate_hz_s <= 8e3,
              fmt("max rate %.1f Hz/s outside [5, 8] kHz/s", d.max_rate_hz_s));
    if (o.pass)
        o.detail = fmt("doppler %.1f Hz, rate %.1f Hz/s", d.max_doppler_hz, d.max_rate_hz_s);
    return o;
}

Outcome link_budget_check() {
    Outcome o;
    const double fspl = free_space_path_loss_db(400e3, 28e9);
    const double noise = noise_power_dbm(-174.0, 240e6);
    o.require(std::abs(fspl - 173.42) <= 0.05, fmt("FSPL %.4f dB", fspl));
    o.require(std::abs(noise + 90.20) <= 0.01, fmt("noise %.4f dBm", noise));
    if (o.pass)
        o.detail = fmt("FSPL %.4f dB, noise %.4f dBm", fspl, noise);
    return o;
}

Outcome crb_shape_check() {
    Outcome o;
    const Scenario sc;
    const auto rows = crb_rows(sc);
    for (const auto& r : rows)
        o.require(r.crb_m.has_value(), r.config + " singular at S=" + std::to_string(r.satellites));
    if (!o.pass)
        return o;
    const auto& ns = sc.crb_n_grid;
    for (int s : sc.crb_s_values) {
        const double sa0 = crb_of(rows, "SA-C", s, ns.front());
        for (int n : ns)
            o.require(std::abs(crb_of(rows, "SA-C", s, n) - sa0) <= 1e-9 * sa0,
                      "(a) SA-C varies with N at S=" + std::to_string(s));
        for (std::size_t i = 1; i < ns.size(); ++i) {
            o.require(crb_of(rows, "MA-C", s, ns[i]) < crb_of(rows, "MA-C", s, ns[i - 1]),
                      "(b) MA-C not decreasing at S=" + std::to_string(s) + " N=" + std::to_string(ns[i]));
            o.require(crb_of(rows, "MA-NC", s, ns[i]) < crb_of(rows, "MA-NC", s, ns[i - 1]),
                      "(b) MA-NC not decreasing at S=" + std::to_string(s) + " N=" + std::to_string(ns[i]));
        }
        for (int n : ns)
            o.require(crb_of(rows, "MA-C", s, n) < crb_of(rows, "MA-NC", s, n),
                      "(c) MA-C >= MA-NC at S=" + std::to_string(s) + " N=" + std::to_string(n));
    }
    for (int n : ns)
        o.require(crb_of(rows, "MA-C", 4, n) < crb_of(rows, "MA-NC", 5, n),
                  "(d) MA-C(S=4) >= MA-NC(S=5) at N=" + std::to_string(n));
    const double gain = crb_of(rows, "MA-C", 4, ns.front()) / crb_of(rows, "MA-C", 4, ns.back());
    o.require(gain >= 10.0, fmt("(e) MA-C reduction %.2fx < 10x", gain));
    if (o.pass)
        o.detail = fmt("MA-C(S=4) %.4g m -> %.4g m (%.1fx)", crb_of(rows, "MA-C", 4, ns.front()),
                       crb_of(rows, "MA-C", 4, ns.back()), gain);
    return o;
}

Outcome rmse_shape_check(unsigned workers) {
    Outcome o;
    const Scenario sc;
    const auto rows = rmse_sweep(rmse_setup(sc), sc.rmse_delay_sigmas_ns, sc.rmse_mismatch_m, 500, sc.seed, workers);
    const std::size_t n_sig = sc.rmse_delay_sigmas_ns.size();
    auto at = [&](std::size_t m, std::size_t i) { return rows[m * n_sig + i]; };

    double lo = 1e300, hi = 0.0;
    for (std::size_t i = 0; i < n_sig; ++i) {
        const RmseRow r = at(0, i);
        const double ratio = r.crb_m ? r.rmse_m / *r.crb_m : std::nan("");
        lo = std::min(lo, ratio);
        hi = std::max(hi, ratio);
        o.require(ratio >= 0.8 && ratio <= 1.5, fmt("(a) RMSE/CRB %.3f at %.4g ns", ratio, r.delay_sigma_ns));
    }
    for (std::size_t m = 1; m < sc.rmse_mismatch_m.size(); ++m) {
        const double a = at(m, 0).rmse_m, b = at(m, 1).rmse_m;
        o.require(std::abs(a - b) < 0.1 * std::max(a, b),
                  fmt("(b) %.0f m mismatch not saturated (%.4g vs %.4g m)", sc.rmse_mismatch_m[m], a, b));
    }
    const double f0 = at(0, 0).rmse_m, f5 = at(1, 0).rmse_m, f10 = at(2, 0).rmse_m;
    o.require(f10 > f5 && f5 > f0, fmt("(c) floors %.4g, %.4g, %.4g m out of order", f0, f5, f10));
    for (std::size_t i = 1; i < n_sig; ++i)
        o.require(at(0, i).rmse_m >= 0.97 * at(0, i - 1).rmse_m,
                  fmt("matched RMSE decreases at %.4g ns", at(0, i).delay_sigma_ns));
    if (o.pass) {
        char buf[200];
        std::snprintf(buf, sizeof buf, "RMSE/CRB in [%.3f, %.3f]; floors 0/5/10 km: %.4g / %.4g / %.4g m", lo, hi, f0,
                      f5, f10);
        o.detail = buf;
    }
    return o;
}

Outcome se_shape_check(unsigned workers) {
    Outcome o;
    const Scenario sc;
    const SeSetup setup = se_setup(sc);
    const auto csi = se_sweep(setup, sc.se_csi_errors, BeamformingMode::outdated_csi, 10'000, sc.seed, workers);
    const auto loc = se_sweep(setup, sc.se_pos_sigmas_m, BeamformingMode::location_based, 10'000, sc.seed, workers);
    for (std::size_t i = 1; i < loc.size(); ++i)
        o.require(loc[i].mean_se <= 1.02 * loc[i - 1].mean_se,
                  fmt("(a) location-based SE rises at %.4g m", loc[i].error_level));
    for (std::size_t i = 1; i < csi.size(); ++i)
        o.require(csi[i].mean_se <= 1.02 * csi[i - 1].mean_se,
                  fmt("(b) outdated-CSI SE rises at %.4g", csi[i].error_level));
    double loc0 = std::nan(""), csi3 = std::nan("");
    for (const auto& p : loc)
        if (p.error_level == 0.0)
            loc0 = p.mean_se;
    for (const auto& p : csi)
        if (std::abs(p.error_level - 1e-3) < 1e-12)
            csi3 = p.mean_se;
    o.require(loc0 > csi3, fmt("(c) SE loc(0) %.4f <= csi(1e-3) %.4f", loc0, csi3));
    if (o.pass)
        o.detail = fmt("SE loc(0) %.4f > csi(1e-3) %.4f bit/s/Hz", loc0, csi3);
    return o;
}

Outcome oracle_check() {
    Outcome o;
    Rng rng(20240601);
    double worst_j = 0.0, worst_g = 0.0, worst_add = 0.0;
    for (int i = 0; i < 100; ++i) {
        const auto rg = testutil::random_geometry(rng);
        const auto g = los_geometry(rg.sat, rg.ue, 28e9);
        const Eigen::MatrixXd analytic = position_jacobian(g, rg.sat, rg.ue, 28e9);
        const Eigen::MatrixXd numeric = testutil::finite_difference_jacobian(
            [&](const Eigen::Vector3d& p) -> Eigen::VectorXd { return observation_vector(rg.sat, p, 28e9); }, rg.ue,
            0.1);
        worst_j = std::max(worst_j, testutil::max_row_relative_error(analytic, numeric));
    }
    std::uniform_int_distribution<int> count(4, 6);
    for (int i = 0; i < 100; ++i) {
        const EcefVector ue = testutil::random_ue(rng);
        const auto sats = testutil::random_constellation(rng, count(rng), ue);
        auto noise = link_noise(sats, ue, TxMode::cooperative, ArrayGeometry::square(8), false, RfConfig{});
        for (auto& n : noise)
            n = n.scaled(1e-18 / n.var_delay);
        const auto obs = simulate_observations(ue, sats, noise, 28e9, rng);
        const EcefVector p = ue + 200.0 * random_unit_vector(rng);
        const Eigen::Vector3d grad = nll(p, obs).gradient;
        const Eigen::MatrixXd numeric = testutil::finite_difference_jacobian(
            [&](const Eigen::Vector3d& q) -> Eigen::VectorXd { return Eigen::VectorXd::Constant(1, nll(q, obs).cost); },
            p, 0.1);
        worst_g = std::max(worst_g, (numeric.transpose() - grad).norm() / grad.norm());

        const Fim3 total = fim_from_noise(sats, ue, 28e9, noise);
        Fim3 sum;
        for (std::size_t s = 0; s < sats.size(); ++s)
            sum += satellite_fim(sats[s], ue, 28e9, noise[s]);
        worst_add = std::max(worst_add, (total.m - sum.m).cwiseAbs().maxCoeff() / total.m.cwiseAbs().maxCoeff());
        o.require(total.is_symmetric() && total.is_psd(), "FIM not symmetric PSD in case " + std::to_string(i));
    }
    o.require(worst_j < 1e-5, fmt("Jacobian FD error %.3g", worst_j));
    o.require(worst_g < 1e-5, fmt("gradient FD error %.3g", worst_g));
    o.require(worst_add <= 1e-9, fmt("FIM additivity error %.3g", worst_add));
    if (o.pass)
        o.detail = fmt("Jacobian %.2g, gradient %.2g, additivity %.2g", worst_j, worst_g, worst_add);
    return o;
}

Outcome determinism_check(unsigned workers) {
    Outcome o;
    const Scenario sc;
    std::string sizes;
    for (const auto& name : experiment_names()) {
        const std::string a = experiment_table(name, sc, 1).to_string();
        const std::string b = experiment_table(name, sc, 1).to_string();
        const std::string c = experiment_table(name, sc, std::max(workers, 4u)).to_string();
        o.require(a == b, name + " differs between runs");
        o.require(a == c, name + " differs across worker counts");
        sizes += (sizes.empty() ? "" : ", ") + name;
    }
    if (o.pass)
        o.detail = "byte-identical: " + sizes;
    return o;
}

Outcome recovery_check() {
    Outcome o;
    Rng rng(777);
    double worst = 0.0;
    for (int i = 0; i < 20; ++i) {
        const int s = 4 + i % 3;
        const EcefVector ue = testutil::random_ue(rng);
        const auto sats = testutil::random_constellation(rng, s, ue);
        const auto noise = link_noise(sats, ue, TxMode::cooperative, ArrayGeometry::square(20), false, RfConfig{});
        std::vector<ObservationNoise> zero;
        for (const auto& n : noise)
            zero.push_back(n.scaled(0.0));
        ObservationSet obs = simulate_observations(ue, sats, zero, 28e9, rng);
        obs.noise = noise;
        const auto r = ml_estimate(obs, MultiStartGrid{});
        const double err = (r.position - ue).norm();
        worst = std::max(worst, err);
        o.require(err < 1e-3, fmt("case %.0f (S=%.0f) error %.3g m", i, s, err));
    }
    if (o.pass)
        o.detail = fmt("worst error %.3g m", worst);
    return o;
}

} // namespace

int main(int argc, char** argv) {
    unsigned workers = 1;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--workers") == 0 && i + 1 < argc) {
            workers = static_cast<unsigned>(std::max(1, std::atoi(argv[++i])));
        } else {
            std::fprintf(stderr, "usage: %s [--workers N]\n", argv[0]);
            return 2;
        }
    }

    struct Criterion {
        const char* id;
        const char* name;
        double budget_s; // 0 = no runtime bound
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria{
        {"1", "doppler envelope at 800 km / 30 GHz", 1.0, doppler_check},
        {"2", "link budget closed forms", 0.0, link_budget_check},
        {"3", "CRB sweep shape", 10.0, crb_shape_check},
        {"4", "RMSE sweep shape (500 trials)", 300.0, [&] { return rmse_shape_check(workers); }},
        {"5", "spectral efficiency sweep shape (10^4 trials)", 120.0, [&] { return se_shape_check(workers); }},
        {"6", "numerical oracles", 0.0, oracle_check},
        {"7", "determinism across runs and worker counts", 0.0, [&] { return determinism_check(workers); }},
        {"8", "zero-noise recovery on random constellations", 0.0, recovery_check},
    };

    int failures = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (c.budget_s > 0.0 && dt > c.budget_s)
            o.require(false, fmt("runtime %.2f s over %.0f s budget", dt, c.budget_s));
        std::printf("%s criterion %s: %s | %s (%.2f s)\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(),
                    dt);
        std::fflush(stdout);
        failures += o.pass ? 0 : 1;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
