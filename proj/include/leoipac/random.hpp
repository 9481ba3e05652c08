// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <random>

#include <Eigen/Dense>

namespace leoipac {

using Rng = std::mt19937_64;

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace detail

/// Independent stream keyed by a master seed and a tuple of indices.
/// The same key always yields the same stream, regardless of which thread
/// asks for it.
inline Rng derive_stream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
    std::uint64_t h = detail::splitmix64(seed);
    for (auto k : keys)
        h = detail::splitmix64(h ^ detail::splitmix64(k + 0x632be59bd9b4e019ULL));
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32)};
    return Rng(seq);
}

/// Circularly-symmetric complex normal with E|z|^2 = variance.
inline std::complex<double> complex_normal(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    const double re = n(rng);
    const double im = n(rng);
    return {re, im};
}

inline Eigen::VectorXcd complex_normal_vector(Rng& rng, Eigen::Index n, double variance = 1.0) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v[i] = complex_normal(rng, variance);
    return v;
}

inline double standard_normal(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    return n(rng);
}

/// Uniformly distributed direction on the unit sphere.
inline Eigen::Vector3d random_unit_vector(Rng& rng) {
    for (;;) {
        Eigen::Vector3d v(standard_normal(rng), standard_normal(rng), standard_normal(rng));
        const double n = v.norm();
        if (n > 1e-12)
            return v / n;
    }
}

} // namespace leoipac
