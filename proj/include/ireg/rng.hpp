#pragma once

#include <cmath>
#include <cstdint>

#include "ireg/errors.hpp"

namespace ireg {

// All randomness in the project flows through one scheme so replications are
// reproducible and order-independent:
//
//   * splitmix64 is the seeding/mixing function;
//   * derive_stream(seed, index) = two splitmix64 steps over seed and index,
//     giving disjoint child seeds (replication k uses derive_stream(base, k));
//   * Xoshiro256pp is the per-stream generator, seeded by four splitmix64 draws;
//   * standard normals use the AS241 inverse-CDF transform (Wichura), one
//     uniform per normal, so streams have no rejection-dependent state.

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

/// Child seed for stream `index` of a parent seed.
inline std::uint64_t derive_stream(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t s = seed;
    std::uint64_t a = splitmix64(s);
    s = a ^ (index * 0x9E3779B97F4A7C15ULL + 0xD1B54A32D192ED03ULL);
    return splitmix64(s);
}

/// Inverse standard normal CDF, AS241 double-precision rational approximation.
inline double inverse_normal_cdf(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw BadArgument("inverse_normal_cdf: p must lie in (0,1)");
    const double q = p - 0.5;
    if (std::fabs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                      6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                    1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                  1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.226495278852545703e3 * r + 2.8729085735721942674e4) * r +
                      3.930789580009271061e4) * r + 2.1213794301586595867e4) * r +
                    5.3941960214247511077e3) * r + 6.871870074920579083e2) * r +
                  4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.7454501427834140764e-4 * r + 2.27238449892691845833e-2) * r +
                     2.4178072517745061177e-1) * r + 1.27045825245236838258e0) * r +
                   3.64784832476320460504e0) * r + 5.7694972214606914055e0) * r +
                 4.6303378461565452959e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.475938084995344946e-4) * r +
                     1.51986665636164571966e-2) * r + 1.4810397642748007459e-1) * r +
                   6.8976733498510000455e-1) * r + 1.6763848301838038494e0) * r +
                 2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                     1.2426609473880784386e-3) * r + 2.6532189526576123093e-2) * r +
                   2.9656057182850489123e-1) * r + 1.7848265399172913358e0) * r +
                 5.4637849111641143699e0) * r + 6.6579046435011037772e0) /
              (((((((2.04426310338993978564e-15 * r + 1.4215117583164458887e-7) * r +
                     1.8463183175100546818e-5) * r + 7.868691311456132591e-4) * r +
                   1.48753612908506148525e-2) * r + 1.3692988092273580531e-1) * r +
                 5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

/// xoshiro256++ (Blackman & Vigna), seeded through splitmix64.
class Xoshiro256pp {
  public:
    explicit Xoshiro256pp(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) word = splitmix64(s);
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() {
        return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    double normal() { return inverse_normal_cdf(uniform()); }

    bool bernoulli(double prob) { return uniform() < prob; }

    /// Uniform integer in [0, bound) by rejection from the top range.
    std::uint64_t below(std::uint64_t bound) {
        const std::uint64_t threshold = (0ULL - bound) % bound;
        for (;;) {
            const std::uint64_t draw = next_u64();
            if (draw >= threshold) return draw % bound;
        }
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) {
        return (x << k) | (x >> (64 - k));
    }
    std::uint64_t state_[4];
};

}  // namespace ireg
