// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <type_traits>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "beamforming.hpp"
#include "channel.hpp"
#include "constants.hpp"
#include "errors.hpp"
#include "fim.hpp"
#include "geometry.hpp"

namespace leoipac {

/// Satellite positions as seen from the UE.
struct ConstellationLayout {
    struct Entry {
        double elevation = 0.0; // rad
        double azimuth = 0.0;   // rad, clockwise from north
        double altitude = 0.0;  // m
    };
    std::vector<Entry> entries;
};

/// One satellite at zenith, the remaining s-1 equally spaced in azimuth at
/// 45 degrees elevation.
inline ConstellationLayout default_layout(int s, double altitude_m) {
    if (s < 1)
        throw ConfigError("at least one satellite is required", "n_satellites");
    ConstellationLayout l;
    l.entries.push_back({kPi / 2.0, 0.0, altitude_m});
    for (int k = 0; k < s - 1; ++k)
        l.entries.push_back({kPi / 4.0, 2.0 * kPi * k / (s - 1), altitude_m});
    return l;
}

/// Satellite states for a layout around `ue`. Velocities are circular and
/// horizontal; the zenith satellite heads north and each ring satellite heads
/// 90 degrees clockwise of its azimuth.
inline std::vector<SatelliteState> layout_satellites(const ConstellationLayout& layout, const EcefVector& ue) {
    const double r_ue = ue.norm();
    const Eigen::Vector3d up = ue / r_ue;
    Eigen::Vector3d east = Eigen::Vector3d::UnitZ().cross(up);
    if (east.norm() < 1e-12)
        east = Eigen::Vector3d::UnitY();
    east.normalize();
    const Eigen::Vector3d north = up.cross(east);

    std::vector<SatelliteState> sats;
    int id = 0;
    for (const auto& e : layout.entries) {
        const Eigen::Vector3d horiz = std::sin(e.azimuth) * east + std::cos(e.azimuth) * north;
        const Eigen::Vector3d dir = std::cos(e.elevation) * horiz + std::sin(e.elevation) * up;
        const double r_sat = kEarthRadius + e.altitude;
        const double b = r_ue * std::sin(e.elevation);
        const double rho = -b + std::sqrt(b * b + r_sat * r_sat - r_ue * r_ue);

        SatelliteState s;
        s.id = id;
        s.position = ue + rho * dir;
        const double heading = id == 0 ? 0.0 : e.azimuth + kPi / 2.0;
        const Eigen::Vector3d h = std::sin(heading) * east + std::cos(heading) * north;
        const Eigen::Vector3d rhat = s.position.normalized();
        s.velocity = (h - h.dot(rhat) * rhat).normalized() * circular_speed(r_sat);
        sats.push_back(s);
        ++id;
    }
    return sats;
}

inline std::vector<SatelliteState> default_satellites(int s, double altitude_m, const EcefVector& ue) {
    return layout_satellites(default_layout(s, altitude_m), ue);
}

/// `count` points log-spaced between `lo` and `hi` inclusive.
inline std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> g;
    for (int i = 0; i < count; ++i)
        g.push_back(count == 1 ? lo : lo * std::pow(hi / lo, static_cast<double>(i) / (count - 1)));
    return g;
}

/// Complete experiment configuration. Defaults are the reference downlink
/// setup: 400 km, 60 dBm, 28 GHz, 240 MHz, -174 dBm/Hz, K = 3, 20x20 array.
struct Scenario {
    double carrier_hz = 28e9;
    double bandwidth_hz = 240e6;
    double tx_power_dbm = 60.0;
    double noise_psd_dbm_hz = -174.0;
    double altitude_m = 400e3;
    double rician_k_linear = 3.0;
    int array_n = 20;
    double spacing_wavelengths = 0.5;
    int n_satellites = 4;
    TxMode tx_mode = TxMode::cooperative;
    double xcorr = 0.5;
    double coherent_time_s = 1e-3;
    double ue_lat_deg = 0.0;
    double ue_lon_deg = 0.0;

    AttenuationConfig attenuation;

    std::vector<double> se_csi_errors = log_grid(1e-4, 1.0, 9);
    std::vector<double> se_pos_sigmas_m = [] {
        std::vector<double> g{0.0};
        for (double v : log_grid(1e2, 1e5, 7))
            g.push_back(v);
        return g;
    }();
    std::size_t se_trials = 10'000;
    std::vector<int> crb_n_grid{2, 4, 8, 16, 32};
    std::vector<int> crb_s_values{4, 5, 6};
    std::vector<double> rmse_delay_sigmas_ns = log_grid(10.0 / 3.0, 10000.0 / 3.0, 13);
    std::vector<double> rmse_mismatch_m{0.0, 5e3, 10e3};
    std::size_t rmse_trials = 500;
    std::vector<double> doppler_altitudes_m{400e3, 550e3, 800e3, 1200e3};
    std::vector<double> doppler_carriers_hz{2e9, 12e9, 28e9, 30e9};
    std::uint64_t seed = 1;

    EcefVector ue() const { return spherical_to_ecef(ue_lat_deg * kPi / 180.0, ue_lon_deg * kPi / 180.0); }
    ArrayGeometry array() const { return {array_n, array_n, spacing_wavelengths}; }

    RfConfig rf() const {
        RfConfig rf;
        rf.carrier_hz = carrier_hz;
        rf.bandwidth_hz = bandwidth_hz;
        rf.tx_power_dbm = tx_power_dbm;
        rf.noise_psd_dbm_hz = noise_psd_dbm_hz;
        rf.coherent_time_s = coherent_time_s;
        rf.xcorr = xcorr;
        rf.attenuation = attenuation;
        return rf;
    }
};

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos)
        return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& key, const std::string& text, int line) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const double v = std::strtod(t.c_str(), &end);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE || !std::isfinite(v))
        throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects a number, got '" + t + "'", key,
                          line);
    return v;
}

inline long long parse_integer(const std::string& key, const std::string& text, int line) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const long long v = std::strtoll(t.c_str(), &end, 10);
    if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects an integer, got '" + t + "'",
                          key, line);
    return v;
}

inline std::uint64_t parse_u64(const std::string& key, const std::string& text, int line) {
    const std::string t = trim(text);
    char* end = nullptr;
    errno = 0;
    const unsigned long long v = std::strtoull(t.c_str(), &end, 10);
    if (t.empty() || t[0] == '-' || end != t.c_str() + t.size() || errno == ERANGE)
        throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects an unsigned integer", key, line);
    return v;
}

inline bool parse_bool(const std::string& key, const std::string& text, int line) {
    const std::string t = trim(text);
    if (t == "true" || t == "1")
        return true;
    if (t == "false" || t == "0")
        return false;
    throw ConfigError("line " + std::to_string(line) + ": '" + key + "' expects true or false", key, line);
}

inline std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        out.push_back(trim(item));
    if (out.size() == 1 && out[0].empty())
        out.clear();
    return out;
}

template <typename T>
std::string join(const std::vector<T>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ",";
        if constexpr (std::is_floating_point_v<T>)
            s += format_double(v[i]);
        else
            s += std::to_string(v[i]);
    }
    return s;
}

/// Reader/writer pair for one scenario key.
struct Field {
    std::function<void(Scenario&, const std::string&, int)> read;
    std::function<std::string(const Scenario&)> write;
};

/// Ordered key table; serialization follows this order.
inline const std::vector<std::pair<std::string, Field>>& fields() {
    using S = Scenario;
    auto real = [](double S::*m) {
        return Field{[m](S& s, const std::string& v, int line) { s.*m = parse_double("", v, line); },
                     [m](const S& s) { return format_double(s.*m); }};
    };
    auto att_real = [](double AttenuationConfig::*m) {
        return Field{[m](S& s, const std::string& v, int line) { s.attenuation.*m = parse_double("", v, line); },
                     [m](const S& s) { return format_double(s.attenuation.*m); }};
    };
    auto att_bool = [](bool AttenuationConfig::*m) {
        return Field{[m](S& s, const std::string& v, int line) { s.attenuation.*m = parse_bool("", v, line); },
                     [m](const S& s) { return std::string(s.attenuation.*m ? "true" : "false"); }};
    };
    auto integer = [](int S::*m) {
        return Field{[m](S& s, const std::string& v, int line) {
                         const long long x = parse_integer("", v, line);
                         if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
                             throw ConfigError("line " + std::to_string(line) + ": integer out of range", "", line);
                         s.*m = static_cast<int>(x);
                     },
                     [m](const S& s) { return std::to_string(s.*m); }};
    };
    auto count = [](std::size_t S::*m) {
        return Field{[m](S& s, const std::string& v, int line) { s.*m = parse_u64("", v, line); },
                     [m](const S& s) { return std::to_string(s.*m); }};
    };
    auto real_list = [](std::vector<double> S::*m) {
        return Field{[m](S& s, const std::string& v, int line) {
                         std::vector<double> out;
                         for (const auto& item : split_list(v))
                             out.push_back(parse_double("", item, line));
                         s.*m = out;
                     },
                     [m](const S& s) { return join(s.*m); }};
    };
    auto int_list = [](std::vector<int> S::*m) {
        return Field{[m](S& s, const std::string& v, int line) {
                         std::vector<int> out;
                         for (const auto& item : split_list(v))
                             out.push_back(static_cast<int>(parse_integer("", item, line)));
                         s.*m = out;
                     },
                     [m](const S& s) { return join(s.*m); }};
    };

    static const std::vector<std::pair<std::string, Field>> table{
        {"carrier_hz", real(&S::carrier_hz)},
        {"bandwidth_hz", real(&S::bandwidth_hz)},
        {"tx_power_dbm", real(&S::tx_power_dbm)},
        {"noise_psd_dbm_hz", real(&S::noise_psd_dbm_hz)},
        {"altitude_m", real(&S::altitude_m)},
        {"rician_k_linear", real(&S::rician_k_linear)},
        {"array_n", integer(&S::array_n)},
        {"spacing_wavelengths", real(&S::spacing_wavelengths)},
        {"n_satellites", integer(&S::n_satellites)},
        {"tx_mode",
         Field{[](S& s, const std::string& v, int line) {
                   const std::string t = trim(v);
                   if (t == "cooperative")
                       s.tx_mode = TxMode::cooperative;
                   else if (t == "non_cooperative")
                       s.tx_mode = TxMode::non_cooperative;
                   else
                       throw ConfigError("line " + std::to_string(line) +
                                             ": 'tx_mode' expects cooperative or non_cooperative",
                                         "tx_mode", line);
               },
               [](const S& s) { return std::string(to_string(s.tx_mode)); }}},
        {"xcorr", real(&S::xcorr)},
        {"coherent_time_s", real(&S::coherent_time_s)},
        {"ue_lat_deg", real(&S::ue_lat_deg)},
        {"ue_lon_deg", real(&S::ue_lon_deg)},
        {"shadow_sigma_db", att_real(&AttenuationConfig::shadow_sigma_db)},
        {"los_condition", att_bool(&AttenuationConfig::los_condition)},
        {"clutter_zenith_db", att_real(&AttenuationConfig::clutter_zenith_db)},
        {"atmospheric_enabled", att_bool(&AttenuationConfig::atmospheric_enabled)},
        {"atmospheric_zenith_db", att_real(&AttenuationConfig::atmospheric_zenith_db)},
        {"ionospheric_scintillation_db", att_real(&AttenuationConfig::ionospheric_scintillation_db)},
        {"tropospheric_scintillation_db", att_real(&AttenuationConfig::tropospheric_scintillation_db)},
        {"penetration_db", att_real(&AttenuationConfig::penetration_db)},
        {"se_csi_errors", real_list(&S::se_csi_errors)},
        {"se_pos_sigmas_m", real_list(&S::se_pos_sigmas_m)},
        {"se_trials", count(&S::se_trials)},
        {"crb_n_grid", int_list(&S::crb_n_grid)},
        {"crb_s_values", int_list(&S::crb_s_values)},
        {"rmse_delay_sigmas_ns", real_list(&S::rmse_delay_sigmas_ns)},
        {"rmse_mismatch_m", real_list(&S::rmse_mismatch_m)},
        {"rmse_trials", count(&S::rmse_trials)},
        {"doppler_altitudes_m", real_list(&S::doppler_altitudes_m)},
        {"doppler_carriers_hz", real_list(&S::doppler_carriers_hz)},
        {"seed",
         Field{[](S& s, const std::string& v, int line) { s.seed = parse_u64("seed", v, line); },
               [](const S& s) { return std::to_string(s.seed); }}},
    };
    return table;
}

} // namespace detail

/// Throws ConfigError naming the first field that violates its bound.
inline void validate(const Scenario& s) {
    auto require = [](bool ok, const char* key, const std::string& bound) {
        if (!ok)
            throw ConfigError(std::string("'") + key + "' must be " + bound, key);
    };
    auto all_of = [](const auto& v, auto pred) {
        for (const auto& x : v)
            if (!pred(x))
                return false;
        return true;
    };
    auto positive = [](double x) { return x > 0.0; };
    auto non_negative = [](double x) { return x >= 0.0; };

    require(s.carrier_hz > 0.0, "carrier_hz", "> 0");
    require(s.bandwidth_hz > 0.0, "bandwidth_hz", "> 0");
    require(std::isfinite(s.tx_power_dbm), "tx_power_dbm", "finite");
    require(std::isfinite(s.noise_psd_dbm_hz), "noise_psd_dbm_hz", "finite");
    require(s.altitude_m >= kMinLeoAltitude && s.altitude_m <= kMaxLeoAltitude, "altitude_m",
            "within [160000, 2000000]");
    require(s.rician_k_linear >= 0.0, "rician_k_linear", ">= 0");
    require(s.array_n >= 1, "array_n", ">= 1");
    require(s.spacing_wavelengths > 0.0, "spacing_wavelengths", "> 0");
    require(s.n_satellites >= 1, "n_satellites", ">= 1");
    require(s.xcorr >= 0.0 && s.xcorr <= 1.0, "xcorr", "within [0, 1]");
    require(s.coherent_time_s > 0.0, "coherent_time_s", "> 0");
    require(s.ue_lat_deg >= -90.0 && s.ue_lat_deg <= 90.0, "ue_lat_deg", "within [-90, 90]");
    require(std::isfinite(s.ue_lon_deg), "ue_lon_deg", "finite");
    require(s.attenuation.shadow_sigma_db >= 0.0, "shadow_sigma_db", ">= 0");
    require(s.attenuation.clutter_zenith_db >= 0.0, "clutter_zenith_db", ">= 0");
    require(s.attenuation.atmospheric_zenith_db >= 0.0, "atmospheric_zenith_db", ">= 0");
    require(s.attenuation.ionospheric_scintillation_db >= 0.0, "ionospheric_scintillation_db", ">= 0");
    require(s.attenuation.tropospheric_scintillation_db >= 0.0, "tropospheric_scintillation_db", ">= 0");
    require(s.attenuation.penetration_db >= 0.0, "penetration_db", ">= 0");
    require(!s.se_csi_errors.empty() && all_of(s.se_csi_errors, non_negative), "se_csi_errors",
            "a non-empty list of values >= 0");
    require(!s.se_pos_sigmas_m.empty() && all_of(s.se_pos_sigmas_m, non_negative), "se_pos_sigmas_m",
            "a non-empty list of values >= 0");
    require(s.se_trials >= 1, "se_trials", ">= 1");
    require(!s.crb_n_grid.empty() && all_of(s.crb_n_grid, [](int n) { return n >= 1; }), "crb_n_grid",
            "a non-empty list of values >= 1");
    require(!s.crb_s_values.empty() && all_of(s.crb_s_values, [](int n) { return n >= 1; }), "crb_s_values",
            "a non-empty list of values >= 1");
    require(!s.rmse_delay_sigmas_ns.empty() && all_of(s.rmse_delay_sigmas_ns, positive), "rmse_delay_sigmas_ns",
            "a non-empty list of values > 0");
    require(!s.rmse_mismatch_m.empty() && all_of(s.rmse_mismatch_m, non_negative), "rmse_mismatch_m",
            "a non-empty list of values >= 0");
    require(s.rmse_trials >= 1, "rmse_trials", ">= 1");
    require(!s.doppler_altitudes_m.empty() && all_of(s.doppler_altitudes_m,
                                                     [](double h) {
                                                         return h >= kMinLeoAltitude && h <= kMaxLeoAltitude;
                                                     }),
            "doppler_altitudes_m", "a non-empty list within [160000, 2000000]");
    require(!s.doppler_carriers_hz.empty() && all_of(s.doppler_carriers_hz, positive), "doppler_carriers_hz",
            "a non-empty list of values > 0");
}

/// Parses `key = value` lines; `#` starts a comment. Missing keys keep their
/// defaults, unknown keys are rejected.
inline Scenario parse_scenario(std::istream& in) {
    Scenario s;
    const auto& table = detail::fields();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        const std::string t = detail::trim(line);
        if (t.empty())
            continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value'", "", lineno);
        const std::string key = detail::trim(t.substr(0, eq));
        const std::string value = detail::trim(t.substr(eq + 1));
        auto it = std::find_if(table.begin(), table.end(), [&](const auto& kv) { return kv.first == key; });
        if (it == table.end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'", key, lineno);
        try {
            it->second.read(s, value, lineno);
        } catch (const ConfigError& e) {
            throw ConfigError("line " + std::to_string(lineno) + ": bad value for '" + key + "': '" + value + "'",
                              key, lineno);
        }
    }
    validate(s);
    return s;
}

inline Scenario load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read scenario file " + path.string());
    return parse_scenario(in);
}

/// Canonical text form; parse_scenario(serialize(s)) reproduces s exactly.
inline std::string serialize(const Scenario& s) {
    std::string out;
    for (const auto& [key, field] : detail::fields())
        out += key + " = " + field.write(s) + "\n";
    return out;
}

inline void save_scenario(const Scenario& s, const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write scenario file " + path.string());
    out << serialize(s);
}

/// 64-bit FNV-1a of the canonical serialization.
inline std::uint64_t scenario_hash(const Scenario& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : serialize(s)) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

} // namespace leoipac
