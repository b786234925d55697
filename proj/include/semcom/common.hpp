#ifndef SEMCOM_COMMON_HPP
#define SEMCOM_COMMON_HPP

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcom {

// Token sequences are row-major throughout: one row per token/feature,
// so a row's d values are contiguous in memory and serialize in wire order.
template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
using CMat = Eigen::Matrix<std::complex<T>, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using MatF = Mat<float>;
using MatD = Mat<double>;
using VecF = Vec<float>;
using VecD = Vec<double>;

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct DimensionError : Error {
    explicit DimensionError(const std::string& msg) : Error(msg) {}
};

struct DegenerateFrameError : Error {
    explicit DegenerateFrameError(const std::string& msg) : Error(msg) {}
};

struct InfeasibleBudgetError : Error {
    explicit InfeasibleBudgetError(const std::string& msg) : Error(msg) {}
};

struct TrainingFailure : Error {
    explicit TrainingFailure(const std::string& msg) : Error(msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

struct IoError : Error {
    explicit IoError(const std::string& msg) : Error(msg) {}
};

// Sent/unsent flag per feature index; values are 0 or 1.
using MaskBitmap = std::vector<std::uint8_t>;

inline int popcount(const MaskBitmap& bits) {
    int n = 0;
    for (auto b : bits) n += (b != 0);
    return n;
}

// FNV-1a, used for content digests (determinism checks, corpus fingerprints).
inline std::uint64_t fnv1a(const void* data, std::size_t len, std::uint64_t h = 14695981039346656037ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 14695981039346656037ull) {
    return fnv1a(s.data(), s.size(), h);
}

}  // namespace semcom

#endif
