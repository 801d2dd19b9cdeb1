#ifndef HFCE_RNG_HPP
#define HFCE_RNG_HPP

#include <cstdint>
#include <random>

#include "hfce/types.hpp"

namespace hfce {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; decorrelates structured seed inputs.
inline std::uint64_t mix_seed(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

/// Independent stream for (sweep point, trial) derived from one master seed.
inline Rng make_trial_rng(std::uint64_t master, std::uint64_t sweep_index, std::uint64_t trial_index) {
    std::uint64_t s = mix_seed(master);
    s = mix_seed(s ^ (0x517cc1b727220a95ULL * (sweep_index + 1)));
    s = mix_seed(s ^ (0x2545f4914f6cdd1dULL * (trial_index + 1)));
    return Rng(s);
}

inline double uniform_real(Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(rng);
}

/// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
inline Complex complex_gaussian(Rng& rng, double variance = 1.0) {
    std::normal_distribution<double> dist(0.0, std::sqrt(variance / 2.0));
    return Complex(dist(rng), dist(rng));
}

inline ComplexVector complex_gaussian_vector(Rng& rng, Eigen::Index n, double variance = 1.0) {
    ComplexVector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v(i) = complex_gaussian(rng, variance);
    return v;
}

inline ComplexMatrix complex_gaussian_matrix(Rng& rng, Eigen::Index r, Eigen::Index c, double variance = 1.0) {
    ComplexMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) m(i, j) = complex_gaussian(rng, variance);
    return m;
}

/// Unit-modulus entries with i.i.d. uniform phases.
inline ComplexMatrix random_phase_matrix(Rng& rng, Eigen::Index r, Eigen::Index c) {
    ComplexMatrix m(r, c);
    for (Eigen::Index j = 0; j < c; ++j)
        for (Eigen::Index i = 0; i < r; ++i) {
            const double ph = uniform_real(rng, 0.0, 2.0 * kPi);
            m(i, j) = Complex(std::cos(ph), std::sin(ph));
        }
    return m;
}

}  // namespace hfce

#endif
