#pragma once

#include <cstdint>
#include <vector>

#include "kronmag/params.hpp"
#include "kronmag/rng.hpp"

namespace kronmag {

// One dropped ball: a (source color, target color) cell of the 2^d x 2^d grid.
struct Ball {
    std::uint64_t source_color = 0;
    std::uint64_t target_color = 0;
};

// Ball-dropping process over a parameter stack. The number of balls is
// Poisson(e_K of the stack) and each ball picks one weighted quadrant per
// level, assembling the source/target colors most significant bit first. Cell
// counts come out as independent Poisson(Gamma_cc') variables.
//
// Entries may exceed 1 (only non-negativity is required); per-level cutoffs
// are normalized once at construction.
class BdpSampler {
public:
    explicit BdpSampler(const ParamStack& theta);

    // total rate: product of per-level entry sums
    double rate() const { return rate_; }
    std::uint32_t depth() const { return static_cast<std::uint32_t>(levels_.size()); }

    // one ball in O(d); throws std::invalid_argument if any level sums to zero
    Ball drop_one(RngStream& stream) const;

    // Poisson(rate) balls into the sink
    template <typename Sink>
    void sample(RngStream& stream, Sink&& sink) const {
        const std::int64_t count = stream.poisson(rate_);
        for (std::int64_t i = 0; i < count; ++i) {
            sink(drop_one(stream));
        }
    }

private:
    struct LevelCutoffs {
        // cumulative probabilities of quadrants (0,0), (0,1), (1,0); zero
        // weight entries collapse onto the previous cutoff and are skipped by
        // construction of the comparison chain
        double c00 = 0.0;
        double c01 = 0.0;
        double c10 = 0.0;
        bool valid = false;  // false when the level total is zero
    };

    std::vector<LevelCutoffs> levels_;
    double rate_ = 0.0;
};

// Convenience wrappers matching the single-call operations.
Ball drop_one_ball(const ParamStack& theta, RngStream& stream);
std::vector<Ball> sample_bdp(const ParamStack& theta, RngStream& stream);

// Parallel variant: T workers, each drawing Poisson(rate/T) balls from its
// own labeled substream (equivalent to a multinomial split of one Poisson
// total). Ball order is deterministic given (seed, label, threads).
std::vector<Ball> sample_bdp_parallel(const ParamStack& theta, std::uint64_t seed,
                                      const std::string& label, unsigned threads);

}  // namespace kronmag
