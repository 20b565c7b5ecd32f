#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace itofl {

// Counter-based generator: every variate is a pure function of (seed, tags),
// so streams can be extended or evaluated out of order without changing any
// existing value, and results cannot depend on thread scheduling.
namespace rng {

inline std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::uint64_t hash2(std::uint64_t seed, std::uint64_t a) { return mix(seed ^ mix(a)); }

inline std::uint64_t hash3(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return mix(mix(seed ^ mix(a)) ^ mix(b ^ 0x7f4a7c15ull));
}

inline std::uint64_t hash4(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
    return mix(hash3(seed, a, b) ^ mix(c ^ 0x2545f4914f6cdd1dull));
}

// uniform in (0,1), never exactly 0 or 1
inline double u01(std::uint64_t bits) {
    return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// standard normal from two counter values (Box-Muller, cosine branch)
inline double gaussian(std::uint64_t h1, std::uint64_t h2) {
    const double u = u01(h1);
    const double v = u01(h2);
    return std::sqrt(-2.0 * std::log(u)) * std::cos(6.283185307179586476925286766559 * v);
}

}  // namespace rng

// Gaussian basis draws: rows are Wiener components i = 1..m, columns are basis
// indices j = 0..p_max. Entry (i, j) depends only on (master_seed, i, j), so a
// larger matrix extends rather than reshuffles a smaller one.
class NoiseMatrix {
  public:
    NoiseMatrix(int m, int p_max, std::uint64_t master_seed)
        : m_(m), p_max_(p_max), seed_(master_seed) {
        if (m < 1 || p_max < 0) throw std::invalid_argument("NoiseMatrix: need m >= 1 and p_max >= 0");
        data_.resize(static_cast<std::size_t>(m) * static_cast<std::size_t>(p_max + 1));
        for (int i = 1; i <= m; ++i)
            for (int j = 0; j <= p_max; ++j) data_[slot(i, j)] = entry_value(master_seed, i, j);
    }

    // the pure mapping behind every entry
    static double entry_value(std::uint64_t master_seed, int i, int j) {
        return rng::gaussian(rng::hash4(master_seed, 0x5a, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j)),
                             rng::hash4(master_seed, 0xa5, static_cast<std::uint64_t>(i),
                                        static_cast<std::uint64_t>(j)));
    }

    int components() const { return m_; }
    int max_index() const { return p_max_; }
    std::uint64_t seed() const { return seed_; }

    double zeta(int i, int j) const {
        if (i < 1 || i > m_ || j < 0 || j > p_max_)
            throw std::out_of_range("NoiseMatrix: (component, index) outside the generated matrix");
        return data_[slot(i, j)];
    }

    // writable access for harnesses that substitute externally coupled draws
    double& zeta_mut(int i, int j) {
        if (i < 1 || i > m_ || j < 0 || j > p_max_)
            throw std::out_of_range("NoiseMatrix: (component, index) outside the generated matrix");
        return data_[slot(i, j)];
    }

  private:
    std::size_t slot(int i, int j) const {
        return static_cast<std::size_t>(i - 1) * static_cast<std::size_t>(p_max_ + 1) +
               static_cast<std::size_t>(j);
    }

    int m_;
    int p_max_;
    std::uint64_t seed_;
    std::vector<double> data_;
};

inline NoiseMatrix gen_noise(int m, int p_max, std::uint64_t master_seed) {
    return NoiseMatrix(m, p_max, master_seed);
}

}  // namespace itofl
