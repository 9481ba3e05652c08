// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace leoipac {

inline constexpr double kSpeedOfLight = 299'792'458.0;   // m/s
inline constexpr double kEarthMu = 3.986004418e14;       // m^3/s^2
inline constexpr double kEarthRadius = 6'371'000.0;      // m, spherical Earth
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kMinLeoAltitude = 160e3;
inline constexpr double kMaxLeoAltitude = 2'000e3;

} // namespace leoipac
