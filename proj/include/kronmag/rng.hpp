#pragma once

#include <cstdint>
#include <string_view>
#include <utility>

#include "kronmag/params.hpp"

namespace kronmag {

// Seedable random stream with exact target distributions.
//
// A stream is addressed by (seed, label): the pair is hashed into the state of
// a xoshiro256++ generator, so identically addressed streams reproduce the
// same draw sequence bit for bit, and distinctly labeled streams are
// independent for simulation purposes. Parallel workers own disjoint streams
// derived from (seed, worker label) without coordination.
//
// A stream is single-owner: it may move between threads but must never be
// shared concurrently.
class RngStream {
public:
    explicit RngStream(std::uint64_t seed, std::string_view label = {});

    std::uint64_t next_u64();

    // uniform double in [0, 1), 53 significant bits
    double uniform01();

    // exact Bernoulli(p), p in [0, 1]
    bool bernoulli(double p);

    // exact uniform integer in [0, k), k >= 1 (Lemire's bounded rejection)
    std::uint64_t uniform_index(std::uint64_t k);

    // exact Poisson(rate) sample; inversion by uniform products below rate 10,
    // Hormann's PTRS transformed rejection above. Both sample the exact pmf.
    std::int64_t poisson(double rate);

    // (a, b) in {0,1}^2 with probability theta_ab / sum(theta)
    std::pair<int, int> quadrant(const InitiatorMatrix& m);

private:
    std::uint64_t s_[4];
};

}  // namespace kronmag
