// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "beamforming.hpp"
#include "channel.hpp"
#include "estimator.hpp"
#include "fim.hpp"
#include "geometry.hpp"
#include "scenario.hpp"

namespace leoipac {

inline constexpr const char* kToolVersion = "0.1.0";

inline const std::vector<std::string>& experiment_names() {
    static const std::vector<std::string> names{"se-sweep", "crb-sweep", "rmse-sweep", "link-budget", "doppler"};
    return names;
}

/// In-memory CSV table: header plus rows of already formatted cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::string to_string() const {
        std::string out;
        auto line = [&](const std::vector<std::string>& cells) {
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (i)
                    out += ',';
                out += cells[i];
            }
            out += '\n';
        };
        line(header);
        for (const auto& r : rows)
            line(r);
        return out;
    }
};

/// Decimal with 12 significant digits.
inline std::string csv_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string csv_number(const std::optional<double>& v) { return v ? csv_number(*v) : std::string("nan"); }

inline CsvTable parse_csv(const std::string& text) {
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            cells.push_back(cell);
        if (first) {
            t.header = cells;
            first = false;
        } else {
            t.rows.push_back(cells);
        }
    }
    return t;
}

inline SeSetup se_setup(const Scenario& sc) {
    SeSetup s;
    const EcefVector ue = sc.ue();
    s.sat = default_satellites(1, sc.altitude_m, ue).front();
    s.ue = ue;
    s.array = sc.array();
    s.carrier_hz = sc.carrier_hz;
    s.rician_k = sc.rician_k_linear;
    s.tx_power_dbm = sc.tx_power_dbm;
    s.noise_psd_dbm_hz = sc.noise_psd_dbm_hz;
    s.bandwidth_hz = sc.bandwidth_hz;
    const LosGeometry g = los_geometry(s.sat, ue, sc.carrier_hz);
    Rng rng = derive_stream(sc.seed, {99});
    s.amplitude = large_scale_loss(g.range, g.elevation, sc.carrier_hz, sc.attenuation, rng).amplitude();
    return s;
}

inline RmseSetup rmse_setup(const Scenario& sc) {
    RmseSetup s;
    s.ue = sc.ue();
    s.sats = default_satellites(sc.n_satellites, sc.altitude_m, s.ue);
    s.carrier_hz = sc.carrier_hz;
    s.reference_noise = link_noise(s.sats, s.ue, sc.tx_mode, sc.array(), sc.array_n < 2, sc.rf());
    return s;
}

inline CsvTable se_sweep_table(const Scenario& sc, unsigned workers) {
    const SeSetup setup = se_setup(sc);
    CsvTable t{{"mode", "error_level", "mean_se_bps_hz", "stderr"}, {}};
    auto emit = [&](const char* mode, const std::vector<SePoint>& pts) {
        for (const auto& p : pts)
            t.rows.push_back({mode, csv_number(p.error_level), csv_number(p.mean_se), csv_number(p.stderr_se)});
    };
    emit("outdated_csi",
         se_sweep(setup, sc.se_csi_errors, BeamformingMode::outdated_csi, sc.se_trials, sc.seed, workers));
    emit("location_based",
         se_sweep(setup, sc.se_pos_sigmas_m, BeamformingMode::location_based, sc.se_trials, sc.seed, workers));
    return t;
}

inline std::vector<CrbRow> crb_rows(const Scenario& sc) {
    return crb_sweep(sc.crb_n_grid, sc.crb_s_values, sc.ue(), sc.altitude_m, sc.rf(), sc.spacing_wavelengths,
                     [](int s, double h, const EcefVector& ue) { return default_satellites(s, h, ue); });
}

inline CsvTable crb_sweep_table(const Scenario& sc) {
    CsvTable t{{"config", "S", "N", "crb_m"}, {}};
    for (const auto& r : crb_rows(sc))
        t.rows.push_back({r.config, std::to_string(r.satellites), std::to_string(r.array_n), csv_number(r.crb_m)});
    return t;
}

inline CsvTable rmse_sweep_table(const Scenario& sc, unsigned workers) {
    CsvTable t{{"mismatch_m", "delay_sigma_ns", "rmse_m", "crb_m", "trials"}, {}};
    const auto rows =
        rmse_sweep(rmse_setup(sc), sc.rmse_delay_sigmas_ns, sc.rmse_mismatch_m, sc.rmse_trials, sc.seed, workers);
    for (const auto& r : rows)
        t.rows.push_back({csv_number(r.mismatch_m), csv_number(r.delay_sigma_ns), csv_number(r.rmse_m),
                          csv_number(r.crb_m), std::to_string(r.trials)});
    return t;
}

/// Attenuation terms for the zenith satellite of the default layout.
inline CsvTable link_budget_table(const Scenario& sc) {
    const EcefVector ue = sc.ue();
    const SatelliteState sat = default_satellites(1, sc.altitude_m, ue).front();
    const LosGeometry g = los_geometry(sat, ue, sc.carrier_hz);
    Rng rng = derive_stream(sc.seed, {99});
    const LinkBudget lb = large_scale_loss(g.range, g.elevation, sc.carrier_hz, sc.attenuation, rng);
    CsvTable t{{"term", "loss_db"}, {}};
    t.rows = {{"free_space", csv_number(lb.fspl_db)},
              {"shadow_fading", csv_number(lb.shadow_db)},
              {"clutter", csv_number(lb.clutter_db)},
              {"atmospheric", csv_number(lb.atmospheric_db)},
              {lb.scintillation_branch == ScintillationBranch::ionospheric ? "ionospheric_scintillation"
                                                                           : "tropospheric_scintillation",
               csv_number(lb.scintillation_db)},
              {"building_penetration", csv_number(lb.penetration_db)},
              {"total", csv_number(lb.total_db)}};
    return t;
}

inline CsvTable doppler_table(const Scenario& sc) {
    CsvTable t{{"altitude_m", "carrier_hz", "max_doppler_hz", "max_rate_hz_s"}, {}};
    for (double h : sc.doppler_altitudes_m)
        for (double f : sc.doppler_carriers_hz) {
            const DopplerEnvelope d = max_doppler_and_rate(h, f);
            t.rows.push_back({csv_number(h), csv_number(f), csv_number(d.max_doppler_hz), csv_number(d.max_rate_hz_s)});
        }
    return t;
}

inline CsvTable experiment_table(const std::string& name, const Scenario& sc, unsigned workers = 1) {
    validate(sc);
    if (name == "se-sweep")
        return se_sweep_table(sc, workers);
    if (name == "crb-sweep")
        return crb_sweep_table(sc);
    if (name == "rmse-sweep")
        return rmse_sweep_table(sc, workers);
    if (name == "link-budget")
        return link_budget_table(sc);
    if (name == "doppler")
        return doppler_table(sc);
    throw ConfigError("unknown experiment '" + name + "'", "experiment");
}

inline std::string hex64(std::uint64_t v) {
    char buf[24];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

namespace detail {

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw Error("cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    if (!out)
        throw Error("write failed for " + path.string());
}

} // namespace detail

/// Runs one experiment and writes `<name>.csv` plus a `<name>.meta` sidecar
/// into `out_dir`. Returns the written paths, CSV first.
inline std::vector<std::filesystem::path> run_experiment(const std::string& name, const Scenario& sc,
                                                         const std::filesystem::path& out_dir, unsigned workers = 1) {
    const CsvTable table = experiment_table(name, sc, workers);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec)
        throw Error("cannot create output directory " + out_dir.string() + ": " + ec.message());

    const auto csv = out_dir / (name + ".csv");
    const auto meta = out_dir / (name + ".meta");
    detail::write_file(csv, table.to_string());
    detail::write_file(meta, "experiment=" + name + "\nscenario_hash=" + hex64(scenario_hash(sc)) +
                                 "\nseed=" + std::to_string(sc.seed) + "\ntool_version=" + kToolVersion +
                                 "\nrows=" + std::to_string(table.rows.size()) + "\n");
    return {csv, meta};
}

} // namespace leoipac
