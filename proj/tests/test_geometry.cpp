// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include <gtest/gtest.h>

#include <leoipac/geometry.hpp>

#include "test_util.hpp"

using namespace leoipac;

namespace {

SatelliteState zenith_satellite(double altitude) {
    SatelliteState s;
    s.position = {kEarthRadius + altitude, 0.0, 0.0};
    s.velocity = {0.0, 0.0, circular_speed(kEarthRadius + altitude)};
    return s;
}

const EcefVector kUe{kEarthRadius, 0.0, 0.0};

} // namespace

TEST(LosGeometry, ZenithPass) {
    const auto g = los_geometry(zenith_satellite(400e3), kUe, 28e9);
    EXPECT_DOUBLE_EQ(g.range, 400e3);
    EXPECT_NEAR(g.elevation, kPi / 2.0, 1e-12);
    // tangential velocity: no radial component
    EXPECT_NEAR(g.doppler, 0.0, 1e-9);
    // UE sits on boresight
    EXPECT_NEAR(g.aod_elevation, 0.0, 1e-12);
}

TEST(LosGeometry, DelayOf400Km) {
    const auto g = los_geometry(zenith_satellite(400e3), kUe, 28e9);
    EXPECT_NEAR(g.delay, 1.33426e-3, 1e-8);
    EXPECT_EQ(g.delay * kSpeedOfLight, g.range / kSpeedOfLight * kSpeedOfLight);
}

TEST(LosGeometry, CoincidentPositionsThrow) {
    SatelliteState s = zenith_satellite(400e3);
    EXPECT_THROW(los_geometry(s, s.position, 28e9), DegenerateGeometry);
}

TEST(LosGeometry, DopplerSignFlipsWithVelocity) {
    Rng rng(11);
    for (int i = 0; i < 50; ++i) {
        auto [ue, sat] = testutil::random_geometry(rng);
        SatelliteState rev = sat;
        rev.velocity = -sat.velocity;
        const double d = los_geometry(sat, ue, 20e9).doppler;
        EXPECT_NEAR(los_geometry(rev, ue, 20e9).doppler, -d, 1e-9 * std::abs(d) + 1e-9);
    }
}

TEST(LosGeometry, DopplerZeroWhenVelocityPerpendicularToLineOfSight) {
    Rng rng(12);
    for (int i = 0; i < 20; ++i) {
        auto [ue, sat] = testutil::random_geometry(rng);
        const Eigen::Vector3d u = (ue - sat.position).normalized();
        const Eigen::Vector3d rhat = sat.position.normalized();
        // tangential to the orbit sphere and perpendicular to u
        Eigen::Vector3d v = rhat.cross(u);
        sat.velocity = v.normalized() * circular_speed(sat.position.norm());
        EXPECT_NEAR(los_geometry(sat, ue, 20e9).doppler, 0.0, 1e-6);
    }
}

TEST(LosGeometry, DirectionCosinesMatchAngles) {
    Rng rng(13);
    for (int i = 0; i < 50; ++i) {
        auto [ue, sat] = testutil::random_geometry(rng);
        const auto g = los_geometry(sat, ue, 20e9);
        EXPECT_NEAR(g.dir_x, std::sin(g.aod_elevation) * std::cos(g.aod_azimuth), 1e-12);
        EXPECT_NEAR(g.dir_y, std::sin(g.aod_elevation) * std::sin(g.aod_azimuth), 1e-12);
        EXPECT_GE(g.elevation, -kPi / 2.0);
        EXPECT_LE(g.elevation, kPi / 2.0);
    }
}

TEST(TimingAdvance, RoundTripValues) {
    // 2*d/c
    EXPECT_NEAR(timing_advance(zenith_satellite(400e3), kUe), 2.66851276e-3, 1e-11);
    EXPECT_NEAR(timing_advance(zenith_satellite(1000e3), kUe), 6.67128190e-3, 1e-11);
    SatelliteState s = zenith_satellite(400e3);
    EXPECT_EQ(timing_advance(s, s.position), 0.0);
}

TEST(TimingAdvance, TwiceTheOneWayDelay) {
    Rng rng(14);
    for (int i = 0; i < 100; ++i) {
        auto [ue, sat] = testutil::random_geometry(rng);
        EXPECT_EQ(timing_advance(sat, ue), 2.0 * los_geometry(sat, ue, 2e9).delay);
    }
}

TEST(MaxDoppler, ReferenceOperatingPoints) {
    const auto d800 = max_doppler_and_rate(800e3, 30e9);
    EXPECT_NEAR(d800.max_doppler_hz, 660e3, 66e3);
    EXPECT_GE(d800.max_rate_hz_s, 6e3);
    EXPECT_LE(d800.max_rate_hz_s, 7e3);

    // closed form evaluated by hand: 674.27 kHz
    EXPECT_NEAR(max_doppler_and_rate(400e3, 28e9).max_doppler_hz, 674271.19, 1.0);
}

TEST(MaxDoppler, HorizonValueMatchesBruteForcePass) {
    // Oracle: walk a satellite along an overhead circular pass and take the
    // largest visible Doppler from finite-differenced range rate.
    const double h = 800e3, f = 30e9;
    const double r = kEarthRadius + h;
    const double omega = circular_speed(r) / r;
    auto range_at = [&](double t) {
        const Eigen::Vector3d p(r * std::cos(omega * t), r * std::sin(omega * t), 0.0);
        return (p - kUe).norm();
    };
    double best = 0.0;
    const double dt = 1e-3;
    for (double t = -600.0; t <= 600.0; t += 0.05) {
        const Eigen::Vector3d p(r * std::cos(omega * t), r * std::sin(omega * t), 0.0);
        if ((p - kUe).dot(kUe) < 0.0)
            continue; // below horizon
        const double rate = (range_at(t + dt) - range_at(t - dt)) / (2.0 * dt);
        best = std::max(best, std::abs(rate) / kSpeedOfLight * f);
    }
    EXPECT_NEAR(max_doppler_and_rate(h, f).max_doppler_hz, best, 1e-3 * best);
}

TEST(MaxDoppler, OutsideLeoBandThrows) {
    EXPECT_THROW(max_doppler_and_rate(100e3, 2e9), DegenerateInput);
    EXPECT_THROW(max_doppler_and_rate(3000e3, 2e9), DegenerateInput);
}

TEST(Propagate, IdentityAtZero) {
    const auto s = zenith_satellite(550e3);
    const auto p = propagate_circular_orbit(s, 0.0);
    EXPECT_EQ(p.position, s.position);
    EXPECT_EQ(p.velocity, s.velocity);
}

TEST(Propagate, FullAndQuarterPeriod) {
    const auto s = zenith_satellite(550e3);
    const double r = s.position.norm();
    const double period = 2.0 * kPi / (circular_speed(r) / r);

    const auto full = propagate_circular_orbit(s, period);
    EXPECT_LT((full.position - s.position).norm() / r, 1e-6);

    const auto quarter = propagate_circular_orbit(s, period / 4.0);
    EXPECT_LT(std::abs(quarter.position.dot(s.position)) / (r * r), 1e-6);
}

TEST(Propagate, PreservesNorms) {
    Rng rng(15);
    std::uniform_real_distribution<double> dt(-1e5, 1e5);
    for (int i = 0; i < 100; ++i) {
        const auto [ue, s] = testutil::random_geometry(rng);
        const auto p = propagate_circular_orbit(s, dt(rng));
        EXPECT_NEAR(p.position.norm() / s.position.norm(), 1.0, 1e-6);
        EXPECT_NEAR(p.velocity.norm() / s.velocity.norm(), 1.0, 1e-6);
        EXPECT_TRUE(is_valid_leo_state(p));
    }
}

TEST(SatelliteState, InvariantCheck) {
    EXPECT_TRUE(is_valid_leo_state(zenith_satellite(400e3)));
    EXPECT_FALSE(is_valid_leo_state(zenith_satellite(100e3)));
    auto fast = zenith_satellite(400e3);
    fast.velocity *= 1.1;
    EXPECT_FALSE(is_valid_leo_state(fast));
}
