#pragma once

#include <array>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "kronmag/bdp.hpp"
#include "kronmag/edgelist.hpp"
#include "kronmag/params.hpp"
#include "kronmag/rng.hpp"

namespace kronmag {

// Draw n independent colors; bit k of each color is Bernoulli(mu^(k)),
// most significant bit first.
ColorAssignment sample_colors(const MuVector& mu, std::uint64_t n, RngStream& stream);

// Realized color sets V_c plus the frequent/infrequent statistics.
//
// A color is frequent when its model expectation E[|V_c|] >= 1, infrequent
// otherwise; the expectation always comes from mu, even for supplied colors.
// Classification is computed in O(d) per queried color, never touching the
// 2^d color space. m_F is the max over realized frequent colors of
// |V_c| / E[|V_c|], rounded up just enough that m_F * E[|V_c|] >= |V_c| holds
// in double arithmetic for every realized frequent color (this makes the
// proposal bounds dominate the targets exactly, not just to rounding).
// m_I is the max multiplicity over realized infrequent colors. Either is 0
// when no such color is realized.
//
// Realized colors live in an open-addressing table sized O(n): proposal loops
// probe it billions of times, and a flat table keeps that to one cache line.
class ColorIndex {
public:
    struct Entry {
        std::uint64_t color = 0;
        std::uint64_t member_begin = 0;  // offset into the member pool
        std::uint64_t count = 0;
        double expected = 0.0;
        bool frequent = false;
    };

    ColorIndex(const ColorAssignment& colors, const MuVector& mu, std::uint64_t n);

    std::uint32_t depth() const { return d_; }
    std::uint64_t node_count() const { return n_; }
    const MuVector& mu() const { return mu_; }

    const Entry* find(std::uint64_t c) const {
        std::uint64_t slot = probe_start(c);
        for (;;) {
            const std::uint32_t idx = slots_[slot];
            if (idx == kEmptySlot) return nullptr;
            const Entry& entry = entries_[idx];
            if (entry.color == c) return &entry;
            slot = (slot + 1) & slot_mask_;
        }
    }
    std::uint64_t count(std::uint64_t c) const {
        const Entry* entry = find(c);
        return entry ? entry->count : 0;
    }
    std::span<const std::uint64_t> members_of(const Entry& entry) const {
        return {member_pool_.data() + entry.member_begin, entry.count};
    }
    double expected_of(std::uint64_t c) const {
        double p = static_cast<double>(n_);
        const double* w = mu_weights_.data();
        for (std::uint32_t k = 0; k < d_; ++k) {
            p *= w[2 * k + ((c >> (d_ - 1 - k)) & 1u)];
        }
        return p;
    }
    bool is_frequent(std::uint64_t c) const { return expected_of(c) >= 1.0; }

    std::uint64_t max_multiplicity() const { return m_; }   // m
    double m_frequent() const { return m_f_; }              // m_F
    std::uint64_t m_infrequent() const { return m_i_; }     // m_I

    const std::vector<Entry>& realized() const { return entries_; }

private:
    static constexpr std::uint32_t kEmptySlot = 0xffffffffu;

    std::uint64_t probe_start(std::uint64_t c) const {
        return (c * 0x9e3779b97f4a7c15ull) >> slot_shift_;
    }

    std::uint32_t d_ = 0;
    std::uint64_t n_ = 0;
    MuVector mu_;
    std::vector<double> mu_weights_;  // [2k] = 1 - mu_k, [2k+1] = mu_k
    std::vector<Entry> entries_;
    std::vector<std::uint32_t> slots_;
    std::vector<std::uint64_t> member_pool_;
    std::uint64_t slot_mask_ = 0;
    int slot_shift_ = 0;
    std::uint64_t m_ = 0;
    double m_f_ = 0.0;
    std::uint64_t m_i_ = 0;
};

ColorIndex build_color_index(const ColorAssignment& colors, const MuVector& mu,
                             std::uint64_t n);

enum class Block : int { ff = 0, fi = 1, if_ = 2, ii = 3 };

// The four proposal stacks. Scale factors like (n m_F)^{2/d} are applied per
// level in log space; a zero m_F or m_I empties the stacks it scales.
struct ProposalFamily {
    std::array<ParamStack, 4> stacks;  // indexed by Block
    double m_f = 0.0;
    std::uint64_t m_i = 0;
    std::uint64_t n = 0;

    const ParamStack& stack(Block b) const { return stacks[static_cast<int>(b)]; }
};

ProposalFamily build_proposals(const ColorIndex& index, const ParamStack& theta,
                               const MuVector& mu, std::uint64_t n);

// Target rate, the matching per-block bound, and the block classification of
// a color pair. The bound is the closed form (m_F E[|V_c|] or m_I per side,
// times Gamma), evaluated as (source_side * target_side) * Gamma so that
// target <= bound holds exactly in double arithmetic.
struct LambdaInfo {
    double target = 0.0;
    double bound = 0.0;
    Block block = Block::ii;
};

LambdaInfo effective_lambda(const ColorIndex& index, const ParamStack& theta,
                            std::uint64_t c, std::uint64_t c2);

struct SampleStats {
    std::array<std::uint64_t, 4> proposed{};  // balls per block; simple mode uses slot 0
    std::uint64_t out_of_block = 0;
    std::uint64_t rejected = 0;
    std::uint64_t accepted = 0;

    std::uint64_t proposed_total() const {
        return proposed[0] + proposed[1] + proposed[2] + proposed[3];
    }
};

namespace detail {

inline double block_side(const ColorIndex& index, bool frequent, double expected) {
    return frequent ? index.m_frequent() * expected
                    : static_cast<double>(index.m_infrequent());
}

// Acceptance ratio for one proposed ball, or 0 when the pair cannot produce
// an edge. The bound sides dominate the counts by construction, so the ratio
// never exceeds 1; anything past 8 ulp is an invariant failure.
inline double acceptance_ratio(std::uint64_t cnt_src, std::uint64_t cnt_tgt,
                               double side_src, double side_tgt) {
    if (cnt_src == 0 || cnt_tgt == 0) return 0.0;
    const double target = static_cast<double>(cnt_src) * static_cast<double>(cnt_tgt);
    const double bound = side_src * side_tgt;
    double ratio = target / bound;
    assert(ratio >= 0.0 && ratio <= 1.0);
    if (ratio > 1.0) {
        if (ratio <= 1.0 + 8.0 * std::numeric_limits<double>::epsilon()) {
            ratio = 1.0;
        } else {
            throw std::logic_error("acceptance ratio exceeds 1 beyond rounding noise");
        }
    }
    return ratio;
}

// Run `n_balls` proposals of one block through the accept-reject filter.
// Membership is settled from the O(d) expectation first; the table is probed
// only for balls that stay in the block.
template <typename Sink>
void run_block(const BdpSampler& bdp, std::int64_t n_balls, Block block,
               const ColorIndex& index, RngStream& stream, Sink&& sink,
               SampleStats& stats) {
    const bool src_frequent = (block == Block::ff || block == Block::fi);
    const bool tgt_frequent = (block == Block::ff || block == Block::if_);
    stats.proposed[static_cast<int>(block)] += static_cast<std::uint64_t>(n_balls);
    for (std::int64_t i = 0; i < n_balls; ++i) {
        const Ball ball = bdp.drop_one(stream);
        const double e_src = index.expected_of(ball.source_color);
        if ((e_src >= 1.0) != src_frequent) {
            ++stats.out_of_block;
            continue;
        }
        const double e_tgt = index.expected_of(ball.target_color);
        if ((e_tgt >= 1.0) != tgt_frequent) {
            ++stats.out_of_block;
            continue;
        }
        const ColorIndex::Entry* src = index.find(ball.source_color);
        const ColorIndex::Entry* tgt = src ? index.find(ball.target_color) : nullptr;
        if (!src || !tgt) {
            ++stats.rejected;  // unrealized color: zero acceptance probability
            continue;
        }
        const double ratio =
            acceptance_ratio(src->count, tgt->count, block_side(index, src_frequent, e_src),
                             block_side(index, tgt_frequent, e_tgt));
        if (!stream.bernoulli(ratio)) {
            ++stats.rejected;
            continue;
        }
        ++stats.accepted;
        const auto src_members = index.members_of(*src);
        const auto tgt_members = index.members_of(*tgt);
        const std::uint64_t i_node = src_members[stream.uniform_index(src->count)];
        const std::uint64_t j_node = tgt_members[stream.uniform_index(tgt->count)];
        sink(i_node, j_node);
    }
}

}  // namespace detail

// Accept-reject core conditioned on a fixed color index: for each block run a
// BDP on its proposal stack, discard balls outside the block, accept the rest
// with probability Lambda / Lambda^(AB), and expand surviving balls to
// uniformly chosen node pairs. Conditioned on the colors the resulting
// per-pair counts are independent Poisson(Psi_ij).
template <typename Sink>
SampleStats sample_magm_ar_into(const ParamStack& theta, const ColorIndex& index,
                                RngStream& stream, Sink&& sink) {
    SampleStats stats;
    const ProposalFamily proposals = build_proposals(index, theta, index.mu(),
                                                     index.node_count());
    for (Block block : {Block::ff, Block::fi, Block::if_, Block::ii}) {
        const bool needs_f = block != Block::ii;
        const bool needs_i = block != Block::ff;
        if ((needs_f && proposals.m_f == 0.0) || (needs_i && proposals.m_i == 0)) {
            continue;  // zero-rate component
        }
        const BdpSampler bdp(proposals.stack(block));
        const std::int64_t n_balls = stream.poisson(bdp.rate());
        detail::run_block(bdp, n_balls, block, index, stream, sink, stats);
    }
    return stats;
}

// Single-proposal variant: one BDP on m^{2/d} Theta, acceptance ratio
// |V_c||V_c'| / m^2, no block filter. Same output distribution.
template <typename Sink>
SampleStats sample_magm_simple_into(const ParamStack& theta, const ColorIndex& index,
                                    RngStream& stream, Sink&& sink) {
    SampleStats stats;
    const std::uint64_t m = index.max_multiplicity();
    if (m == 0) return stats;
    ParamStack proposal = theta;
    const double scale =
        std::exp((2.0 / static_cast<double>(theta.depth())) * std::log(static_cast<double>(m)));
    for (auto& level : proposal.levels) {
        level.theta00 *= scale;
        level.theta01 *= scale;
        level.theta10 *= scale;
        level.theta11 *= scale;
    }
    const BdpSampler bdp(proposal);
    const std::int64_t n_balls = stream.poisson(bdp.rate());
    stats.proposed[0] += static_cast<std::uint64_t>(n_balls);
    const double m_sq = static_cast<double>(m) * static_cast<double>(m);
    for (std::int64_t i = 0; i < n_balls; ++i) {
        const Ball ball = bdp.drop_one(stream);
        const ColorIndex::Entry* src = index.find(ball.source_color);
        const ColorIndex::Entry* tgt = src ? index.find(ball.target_color) : nullptr;
        if (!src || !tgt) {
            ++stats.rejected;
            continue;
        }
        const double ratio =
            static_cast<double>(src->count) * static_cast<double>(tgt->count) / m_sq;
        if (!stream.bernoulli(ratio)) {
            ++stats.rejected;
            continue;
        }
        ++stats.accepted;
        const auto src_members = index.members_of(*src);
        const auto tgt_members = index.members_of(*tgt);
        const std::uint64_t i_node = src_members[stream.uniform_index(src->count)];
        const std::uint64_t j_node = tgt_members[stream.uniform_index(tgt->count)];
        sink(i_node, j_node);
    }
    return stats;
}

struct MagmSample {
    EdgeList edges;
    ColorAssignment colors;
    SampleStats stats;
};

// Full samplers: draw colors when none are supplied, then run the
// accept-reject loop. Requires a Bernoulli-valid theta stack (the targets are
// probabilities); violations throw std::domain_error.
MagmSample sample_magm_ar(const ModelConfig& config, RngStream& stream,
                          const std::optional<ColorAssignment>& colors = std::nullopt);
MagmSample sample_magm_simple(const ModelConfig& config, RngStream& stream,
                              const std::optional<ColorAssignment>& colors = std::nullopt);

// Parallel variant used by the CLI: per-block proposal volume is split across
// `threads` workers, each drawing Poisson(rate/threads) balls from its own
// labeled substream. threads == 1 reproduces sample_magm_ar output given the
// stream labeled `label`.
MagmSample sample_magm_ar_parallel(const ModelConfig& config, const std::string& label,
                                   unsigned threads,
                                   const std::optional<ColorAssignment>& colors = std::nullopt);

}  // namespace kronmag
