#ifndef CONEFP_COMMON_HPP
#define CONEFP_COMMON_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace conefp {

/// Deterministic uniform sampler. mt19937_64 output is fixed by the standard,
/// and the [0,1) mapping below avoids the implementation-defined
/// std::uniform_real_distribution, so streams are reproducible across
/// platforms and library versions.
class Rng {
public:
    explicit Rng(std::uint64_t seed = 0) : gen_(seed) {}

    std::uint64_t next_u64() { return gen_(); }

    /// Uniform in [0,1).
    double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

    /// Uniform in [lo,hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Uniform integer in [0,n).
    std::size_t index(std::size_t n) { return static_cast<std::size_t>(gen_() % n); }

private:
    std::mt19937_64 gen_;
};

inline void require(bool cond, const std::string& what) {
    if (!cond)
        throw std::invalid_argument(what);
}

inline bool nearly_equal(double a, double b, double tol) {
    return std::fabs(a - b) <= tol * (1.0 + std::fabs(a) + std::fabs(b));
}

} // namespace conefp

#endif // CONEFP_COMMON_HPP
