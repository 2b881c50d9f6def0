#include "kronmag/magm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <thread>

namespace kronmag {

namespace {

// smallest double x with x * denom >= numer (numer a non-negative integer
// value, denom > 0); at most a couple of ulps above numer / denom
double divide_rounding_up(double numer, double denom) {
    double x = numer / denom;
    while (x * denom < numer) {
        x = std::nextafter(x, std::numeric_limits<double>::infinity());
    }
    return x;
}

ParamStack zero_stack(std::uint32_t d) {
    ParamStack stack;
    stack.levels.assign(d, InitiatorMatrix{});
    return stack;
}

void require_bernoulli_valid_targets(const ParamStack& theta) {
    for (std::size_t k = 0; k < theta.levels.size(); ++k) {
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                const double w = theta.levels[k].at(a, b);
                if (w > 1.0) {
                    throw std::domain_error(
                        "theta[" + std::to_string(k) + "] entry (" + std::to_string(a) +
                        "," + std::to_string(b) + ") = " + std::to_string(w) +
                        " exceeds 1; MAGM targets must be probabilities");
                }
            }
        }
    }
}

}  // namespace

ColorAssignment sample_colors(const MuVector& mu, std::uint64_t n, RngStream& stream) {
    mu.validate();
    ColorAssignment out;
    out.d = mu.depth();
    out.colors.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::uint64_t c = 0;
        for (double p : mu.values) {
            c = (c << 1) | static_cast<std::uint64_t>(stream.bernoulli(p));
        }
        out.colors.push_back(c);
    }
    return out;
}

ColorIndex::ColorIndex(const ColorAssignment& colors, const MuVector& mu, std::uint64_t n)
    : d_(colors.d), n_(n), mu_(mu) {
    colors.validate();
    mu_.validate();
    if (mu_.depth() != d_) {
        throw std::invalid_argument("color index: mu depth does not match colors");
    }
    if (colors.node_count() != n) {
        throw std::invalid_argument("color index: node count does not match colors");
    }
    mu_weights_.resize(2 * d_);
    for (std::uint32_t k = 0; k < d_; ++k) {
        mu_weights_[2 * k] = 1.0 - mu_.values[k];
        mu_weights_[2 * k + 1] = mu_.values[k];
    }

    if (colors.node_count() >= kEmptySlot) {
        throw std::length_error("color index: too many nodes for the slot table");
    }

    // group node ids by color: sort (color, node) pairs, then cut runs
    std::vector<std::pair<std::uint64_t, std::uint64_t>> by_color;
    by_color.reserve(colors.node_count());
    for (std::uint64_t i = 0; i < colors.node_count(); ++i) {
        by_color.emplace_back(colors.colors[i], i);
    }
    std::sort(by_color.begin(), by_color.end());

    member_pool_.reserve(by_color.size());
    for (std::size_t i = 0; i < by_color.size();) {
        const std::uint64_t color = by_color[i].first;
        Entry entry;
        entry.color = color;
        entry.member_begin = member_pool_.size();
        while (i < by_color.size() && by_color[i].first == color) {
            member_pool_.push_back(by_color[i].second);
            ++i;
        }
        entry.count = member_pool_.size() - entry.member_begin;
        entry.expected = expected_of(color);
        entry.frequent = entry.expected >= 1.0;
        m_ = std::max(m_, entry.count);
        if (entry.frequent) {
            m_f_ = std::max(m_f_, divide_rounding_up(static_cast<double>(entry.count),
                                                     entry.expected));
        } else {
            m_i_ = std::max(m_i_, entry.count);
        }
        entries_.push_back(entry);
    }

    // open-addressing slot table at load factor <= 0.5
    std::uint64_t capacity = 16;
    while (capacity < 2 * std::max<std::uint64_t>(entries_.size(), 1)) capacity <<= 1;
    slots_.assign(capacity, kEmptySlot);
    slot_mask_ = capacity - 1;
    slot_shift_ = 64 - std::countr_zero(capacity);
    for (std::uint32_t idx = 0; idx < entries_.size(); ++idx) {
        std::uint64_t slot = probe_start(entries_[idx].color);
        while (slots_[slot] != kEmptySlot) slot = (slot + 1) & slot_mask_;
        slots_[slot] = idx;
    }
}

ColorIndex build_color_index(const ColorAssignment& colors, const MuVector& mu,
                             std::uint64_t n) {
    return ColorIndex(colors, mu, n);
}

ProposalFamily build_proposals(const ColorIndex& index, const ParamStack& theta,
                               const MuVector& mu, std::uint64_t n) {
    theta.validate();
    mu.validate();
    const std::uint32_t d = theta.depth();
    if (mu.depth() != d) {
        throw std::invalid_argument("build_proposals: mu depth does not match theta");
    }
    ProposalFamily out;
    out.m_f = index.m_frequent();
    out.m_i = index.m_infrequent();
    out.n = n;

    const double dd = static_cast<double>(d);
    const double nn = static_cast<double>(n);
    const double mf = out.m_f;
    const double mi = static_cast<double>(out.m_i);

    for (int b = 0; b < 4; ++b) out.stacks[b] = zero_stack(d);

    // per-level scale factors, exponentiated from logs to keep d-fold products stable
    const double scale_ff = mf > 0.0 ? std::exp((2.0 / dd) * std::log(nn * mf)) : 0.0;
    const double scale_fi =
        (mf > 0.0 && mi > 0.0) ? std::exp((1.0 / dd) * std::log(nn * mf * mi)) : 0.0;
    const double scale_ii = mi > 0.0 ? std::exp((2.0 / dd) * std::log(mi)) : 0.0;

    for (std::uint32_t k = 0; k < d; ++k) {
        const auto& t = theta.levels[k];
        const double u = mu.values[k];
        const double v = 1.0 - u;

        if (scale_ff > 0.0) {
            auto& m = out.stacks[static_cast<int>(Block::ff)].levels[k];
            m.theta00 = scale_ff * (v * v * t.theta00);
            m.theta01 = scale_ff * (v * u * t.theta01);
            m.theta10 = scale_ff * (u * v * t.theta10);
            m.theta11 = scale_ff * (u * u * t.theta11);
        }
        if (scale_fi > 0.0) {
            auto& m = out.stacks[static_cast<int>(Block::fi)].levels[k];
            m.theta00 = scale_fi * (v * t.theta00);
            m.theta01 = scale_fi * (v * t.theta01);
            m.theta10 = scale_fi * (u * t.theta10);
            m.theta11 = scale_fi * (u * t.theta11);
            // IF weights the target bit instead of the source bit
            auto& w = out.stacks[static_cast<int>(Block::if_)].levels[k];
            w.theta00 = scale_fi * (v * t.theta00);
            w.theta01 = scale_fi * (u * t.theta01);
            w.theta10 = scale_fi * (v * t.theta10);
            w.theta11 = scale_fi * (u * t.theta11);
        }
        if (scale_ii > 0.0) {
            auto& m = out.stacks[static_cast<int>(Block::ii)].levels[k];
            m.theta00 = scale_ii * t.theta00;
            m.theta01 = scale_ii * t.theta01;
            m.theta10 = scale_ii * t.theta10;
            m.theta11 = scale_ii * t.theta11;
        }
    }
    return out;
}

LambdaInfo effective_lambda(const ColorIndex& index, const ParamStack& theta,
                            std::uint64_t c, std::uint64_t c2) {
    const double gamma = gamma_entry(theta, c, c2);
    const double e_src = index.expected_of(c);
    const double e_tgt = index.expected_of(c2);
    const bool src_frequent = e_src >= 1.0;
    const bool tgt_frequent = e_tgt >= 1.0;

    LambdaInfo info;
    info.block = src_frequent ? (tgt_frequent ? Block::ff : Block::fi)
                              : (tgt_frequent ? Block::if_ : Block::ii);
    const double counts =
        static_cast<double>(index.count(c)) * static_cast<double>(index.count(c2));
    info.target = counts * gamma;
    const double side_src = detail::block_side(index, src_frequent, e_src);
    const double side_tgt = detail::block_side(index, tgt_frequent, e_tgt);
    info.bound = (side_src * side_tgt) * gamma;
    return info;
}

namespace {

MagmSample finish_sample(const ModelConfig& config, const char* mode,
                         ColorAssignment&& colors, EdgeList&& edges, SampleStats stats) {
    edges.mode = mode;
    edges.d = config.d;
    edges.n = config.n;
    edges.seed = config.seed;
    edges.theta_digest = digest_hex(format_theta(config.theta));
    if (config.mu) edges.mu_digest = digest_hex(format_mu(*config.mu));
    MagmSample out;
    out.edges = std::move(edges);
    out.colors = std::move(colors);
    out.stats = stats;
    return out;
}

ColorAssignment obtain_colors(const ModelConfig& config, RngStream& stream,
                              const std::optional<ColorAssignment>& supplied) {
    if (supplied) {
        supplied->validate();
        if (supplied->d != config.d || supplied->node_count() != config.n) {
            throw std::invalid_argument("supplied colors do not match the model config");
        }
        return *supplied;
    }
    return sample_colors(*config.mu, config.n, stream);
}

void require_magm_config(const ModelConfig& config) {
    config.validate();
    if (!config.mu) {
        throw std::invalid_argument("MAGM sampling requires mu");
    }
    require_bernoulli_valid_targets(config.theta);
}

}  // namespace

MagmSample sample_magm_ar(const ModelConfig& config, RngStream& stream,
                          const std::optional<ColorAssignment>& colors) {
    require_magm_config(config);
    ColorAssignment assignment = obtain_colors(config, stream, colors);
    const ColorIndex index(assignment, *config.mu, config.n);
    EdgeList edges;
    SampleStats stats = sample_magm_ar_into(
        config.theta, index, stream,
        [&](std::uint64_t i, std::uint64_t j) { edges.edges.emplace_back(i, j); });
    return finish_sample(config, "magm-ar", std::move(assignment), std::move(edges), stats);
}

MagmSample sample_magm_simple(const ModelConfig& config, RngStream& stream,
                              const std::optional<ColorAssignment>& colors) {
    require_magm_config(config);
    ColorAssignment assignment = obtain_colors(config, stream, colors);
    const ColorIndex index(assignment, *config.mu, config.n);
    EdgeList edges;
    SampleStats stats = sample_magm_simple_into(
        config.theta, index, stream,
        [&](std::uint64_t i, std::uint64_t j) { edges.edges.emplace_back(i, j); });
    return finish_sample(config, "magm-simple", std::move(assignment), std::move(edges), stats);
}

MagmSample sample_magm_ar_parallel(const ModelConfig& config, const std::string& label,
                                   unsigned threads,
                                   const std::optional<ColorAssignment>& colors) {
    if (threads == 0) throw std::invalid_argument("threads must be >= 1");
    if (threads == 1) {
        RngStream stream(config.seed, label);
        return sample_magm_ar(config, stream, colors);
    }
    require_magm_config(config);
    RngStream color_stream(config.seed, label + "/colors");
    ColorAssignment assignment = obtain_colors(config, color_stream, colors);
    const ColorIndex index(assignment, *config.mu, config.n);
    const ProposalFamily proposals = build_proposals(index, config.theta, *config.mu, config.n);

    SampleStats stats;
    EdgeList edges;
    static const char* kBlockNames[4] = {"ff", "fi", "if", "ii"};
    for (Block block : {Block::ff, Block::fi, Block::if_, Block::ii}) {
        const bool needs_f = block != Block::ii;
        const bool needs_i = block != Block::ff;
        if ((needs_f && proposals.m_f == 0.0) || (needs_i && proposals.m_i == 0)) continue;
        const BdpSampler bdp(proposals.stack(block));
        const double share = bdp.rate() / static_cast<double>(threads);
        std::vector<std::vector<std::pair<std::uint64_t, std::uint64_t>>> partial(threads);
        std::vector<SampleStats> partial_stats(threads);
        std::vector<std::thread> workers;
        workers.reserve(threads);
        for (unsigned w = 0; w < threads; ++w) {
            workers.emplace_back([&, w, block] {
                RngStream stream(config.seed, label + "/" +
                                                  kBlockNames[static_cast<int>(block)] + "/w" +
                                                  std::to_string(w));
                const std::int64_t n_balls = stream.poisson(share);
                detail::run_block(
                    bdp, n_balls, block, index, stream,
                    [&](std::uint64_t i, std::uint64_t j) { partial[w].emplace_back(i, j); },
                    partial_stats[w]);
            });
        }
        for (auto& t : workers) t.join();
        for (unsigned w = 0; w < threads; ++w) {
            edges.edges.insert(edges.edges.end(), partial[w].begin(), partial[w].end());
            for (int b = 0; b < 4; ++b) stats.proposed[b] += partial_stats[w].proposed[b];
            stats.out_of_block += partial_stats[w].out_of_block;
            stats.rejected += partial_stats[w].rejected;
            stats.accepted += partial_stats[w].accepted;
        }
    }
    return finish_sample(config, "magm-ar", std::move(assignment), std::move(edges), stats);
}

}  // namespace kronmag
