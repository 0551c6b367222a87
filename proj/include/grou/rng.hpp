#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>

namespace grou {

/// Philox4x32-10 counter-based generator (Salmon et al., Random123).
///
/// The 64-bit key is the user seed. The 128-bit counter is split into a
/// 64-bit block index (low words) and two 32-bit stream identifiers (high
/// words). Every stochastic routine receives its own stream, derived as
///
///     stream(seed, replicate, purpose) -> key = seed,
///                                         counter = [block, 0, replicate, purpose]
///
/// so that replicates and sub-streams (W, L, J, T, jumps, ...) never overlap
/// and results do not depend on the order in which replicates run.
class Philox4x32 {
public:
    using result_type = std::uint32_t;

    Philox4x32(std::uint64_t seed, std::uint32_t stream_hi = 0, std::uint32_t stream_lo = 0) noexcept
        : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)},
          stream_{stream_lo, stream_hi} {}

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

    result_type operator()() noexcept {
        if (pos_ == 4) {
            refill();
        }
        return buffer_[pos_++];
    }

    /// Raw block function, exposed for known-answer tests.
    static std::array<std::uint32_t, 4> block(std::array<std::uint32_t, 4> ctr,
                                              std::array<std::uint32_t, 2> key) noexcept {
        constexpr std::uint32_t m0 = 0xD2511F53u;
        constexpr std::uint32_t m1 = 0xCD9E8D57u;
        constexpr std::uint32_t w0 = 0x9E3779B9u;
        constexpr std::uint32_t w1 = 0xBB67AE85u;
        for (int round = 0; round < 10; ++round) {
            const std::uint64_t p0 = static_cast<std::uint64_t>(m0) * ctr[0];
            const std::uint64_t p1 = static_cast<std::uint64_t>(m1) * ctr[2];
            const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
            const auto lo0 = static_cast<std::uint32_t>(p0);
            const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
            const auto lo1 = static_cast<std::uint32_t>(p1);
            ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
            key[0] += w0;
            key[1] += w1;
        }
        return ctr;
    }

private:
    void refill() noexcept {
        buffer_ = block({static_cast<std::uint32_t>(counter_), static_cast<std::uint32_t>(counter_ >> 32),
                         stream_[0], stream_[1]},
                        key_);
        ++counter_;
        pos_ = 0;
    }

    std::array<std::uint32_t, 2> key_;
    std::array<std::uint32_t, 2> stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int pos_ = 4;
};

/// Stream purposes. Values are part of the reproducibility contract.
enum class Stream : std::uint32_t {
    Gaussian = 1,
    Jumps = 2,
    Init = 3,
    Graph = 4,
    Volatility = 5,     // matrix subordinator L
    TimeChange = 6,     // clock T
    TimeChangedJumps = 7,
    Brownian = 8,       // W of the volatility-modulated model
    Test = 99,
};

/// Sampling helpers on top of Philox4x32. The distributions are written out
/// here (rather than using <random>) so that draws are identical across
/// standard library implementations.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint32_t replicate, Stream purpose) noexcept
        : engine_(seed, static_cast<std::uint32_t>(purpose), replicate) {}

    explicit Rng(std::uint64_t seed) noexcept : engine_(seed, 0, 0) {}

    /// Uniform on the open interval (0, 1), 53-bit resolution.
    double uniform() noexcept {
        const std::uint64_t hi = engine_();
        const std::uint64_t lo = engine_();
        const std::uint64_t bits = ((hi << 32) | lo) >> 11;
        return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
    }

    double uniform(double a, double b) noexcept { return a + (b - a) * uniform(); }

    double normal() noexcept {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = r * std::sin(angle);
        has_spare_ = true;
        return r * std::cos(angle);
    }

    double exponential(double mean) noexcept { return -mean * std::log(uniform()); }

    double laplace(double scale) noexcept {
        const double u = uniform() - 0.5;
        return (u < 0 ? scale : -scale) * std::log(1.0 - 2.0 * std::abs(u));
    }

    /// Exact Poisson sampler: multiplication method, with large means split
    /// into independent pieces of mean at most 20.
    std::uint64_t poisson(double mean) noexcept {
        if (!(mean > 0.0)) {
            return 0;
        }
        std::uint64_t total = 0;
        while (mean > 20.0) {
            total += poisson_small(20.0);
            mean -= 20.0;
        }
        return total + poisson_small(mean);
    }

    Eigen::VectorXd normal_vector(Eigen::Index d) noexcept {
        Eigen::VectorXd z(d);
        for (Eigen::Index i = 0; i < d; ++i) {
            z[i] = normal();
        }
        return z;
    }

    /// Uniform direction on the unit sphere in R^d.
    Eigen::VectorXd unit_vector(Eigen::Index d) noexcept {
        for (;;) {
            Eigen::VectorXd z = normal_vector(d);
            const double n = z.norm();
            if (n > 1e-12) {
                return z / n;
            }
        }
    }

private:
    std::uint64_t poisson_small(double mean) noexcept {
        const double limit = std::exp(-mean);
        std::uint64_t k = 0;
        double p = uniform();
        while (p > limit) {
            ++k;
            p *= uniform();
        }
        return k;
    }

    Philox4x32 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace grou
