#ifndef SEMCOM_RNG_HPP
#define SEMCOM_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>

#include "semcom/common.hpp"

namespace semcom {

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

// Stable child-seed derivation: every stage/sweep point owns an independent
// stream derived from (master, label, index), so skipping or reordering work
// units never shifts anyone else's randomness.
inline std::uint64_t derive_seed(std::uint64_t master, const std::string& label, std::uint64_t index = 0) {
    std::uint64_t s = master ^ fnv1a(label) ^ (0x632be59bd9b4e019ull * (index + 1));
    return splitmix64(s);
}

// mt19937_64 with a hand-rolled Box-Muller normal so the produced sequence
// is pinned by this code, not by the standard library's distribution choice.
class Rng {
   public:
    explicit Rng(std::uint64_t seed) : gen_(seed) {}

    std::uint64_t raw() { return gen_(); }

    // uniform in [0, 1)
    double uniform() {
        return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    // uniform integer in [0, n)
    std::uint64_t uniform_index(std::uint64_t n) {
        // rejection sampling keeps the draw exactly uniform
        const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
        std::uint64_t x;
        do {
            x = gen_();
        } while (x >= limit);
        return x % n;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        double u1, u2;
        do {
            u1 = uniform();
        } while (u1 <= 0.0);
        u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double t = 6.283185307179586476925286766559 * u2;
        spare_ = r * std::sin(t);
        have_spare_ = true;
        return r * std::cos(t);
    }

    template <class T>
    void fill_normal(Mat<T>& m, double stddev = 1.0) {
        for (Eigen::Index i = 0; i < m.rows(); ++i)
            for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = static_cast<T>(stddev * normal());
    }

    template <class It>
    void shuffle(It first, It last) {
        const auto n = static_cast<std::uint64_t>(last - first);
        for (std::uint64_t i = n; i > 1; --i) {
            const std::uint64_t j = uniform_index(i);
            std::swap(first[i - 1], first[j]);
        }
    }

   private:
    std::mt19937_64 gen_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace semcom

#endif
