#include "kronmag/rng.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace kronmag {

namespace {

inline std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

inline std::uint64_t splitmix64(std::uint64_t& state) {
    std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

[[noreturn]] void arg_error(const char* msg) { throw std::invalid_argument(msg); }

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::string_view label) {
    // absorb the seed and the label bytes into one 64-bit mix, then expand
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (int i = 0; i < 8; ++i) {
        h ^= (seed >> (8 * i)) & 0xffu;
        h *= 0x100000001b3ull;
    }
    for (unsigned char b : label) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    std::uint64_t sm = h;
    for (auto& word : s_) word = splitmix64(sm);
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 0x9e3779b97f4a7c15ull;
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
}

double RngStream::uniform01() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

bool RngStream::bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) arg_error("bernoulli: p must lie in [0, 1]");
    return uniform01() < p;
}

std::uint64_t RngStream::uniform_index(std::uint64_t k) {
    if (k == 0) arg_error("uniform_index: k must be >= 1");
    // Lemire's multiply-shift with rejection of the biased range
    std::uint64_t x = next_u64();
    unsigned __int128 m = static_cast<unsigned __int128>(x) * k;
    auto low = static_cast<std::uint64_t>(m);
    if (low < k) {
        const std::uint64_t threshold = (0 - k) % k;
        while (low < threshold) {
            x = next_u64();
            m = static_cast<unsigned __int128>(x) * k;
            low = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

std::int64_t RngStream::poisson(double rate) {
    if (!std::isfinite(rate) || rate < 0.0) {
        arg_error("poisson: rate must be finite and non-negative");
    }
    if (rate == 0.0) return 0;

    if (rate < 10.0) {
        // inversion by products of uniforms: count factors until the running
        // product drops below exp(-rate)
        const double limit = std::exp(-rate);
        double prod = uniform01();
        std::int64_t count = 0;
        while (prod > limit) {
            prod *= uniform01();
            ++count;
        }
        return count;
    }

    // Hormann's PTRS: transformed rejection with squeeze. The dominating
    // curve G(u) = (2a/(0.5-|u|) + b)u + c is tuned so the acceptance test
    // against the exact pmf needs one log most of the time.
    const double log_rate = std::log(rate);
    const double b = 0.931 + 2.53 * std::sqrt(rate);
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        double u = uniform01() - 0.5;
        const double v = uniform01();
        const double us = 0.5 - std::fabs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
        if (kf < 0.0) continue;
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
        if (us < 0.013 && v > us) continue;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = -rate + kf * log_rate - std::lgamma(kf + 1.0);
        if (lhs <= rhs) return static_cast<std::int64_t>(kf);
    }
}

std::pair<int, int> RngStream::quadrant(const InitiatorMatrix& m) {
    m.validate();
    const double total = m.total();
    if (total <= 0.0) arg_error("quadrant: matrix must have positive total weight");
    const double u = uniform01() * total;
    // walk positive-weight quadrants only; the last one absorbs any rounding
    // residue at u == total, so zero-weight quadrants can never be selected
    double cum = 0.0;
    std::pair<int, int> last{-1, -1};
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            const double w = m.at(a, b);
            if (w <= 0.0) continue;
            cum += w;
            if (u < cum) return {a, b};
            last = {a, b};
        }
    }
    return last;
}

}  // namespace kronmag
