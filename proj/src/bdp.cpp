#include "kronmag/bdp.hpp"

#include <stdexcept>
#include <thread>

namespace kronmag {

BdpSampler::BdpSampler(const ParamStack& theta) {
    theta.validate();
    levels_.reserve(theta.depth());
    rate_ = 1.0;
    for (const auto& m : theta.levels) {
        const double cum1 = m.theta00;
        const double cum2 = cum1 + m.theta01;
        const double cum3 = cum2 + m.theta10;
        const double total = cum3 + m.theta11;
        LevelCutoffs cut;
        if (total > 0.0) {
            cut.c00 = cum1 / total;
            cut.c01 = cum2 / total;
            cut.c10 = cum3 / total;
            cut.valid = true;
        }
        levels_.push_back(cut);
        rate_ *= total;
    }
}

Ball BdpSampler::drop_one(RngStream& stream) const {
    std::uint64_t src = 0;
    std::uint64_t tgt = 0;
    for (const auto& cut : levels_) {
        if (!cut.valid) {
            throw std::invalid_argument("drop_one_ball: level has zero total weight");
        }
        const double u = stream.uniform01();
        // branchless 4-way choice: cutoffs are ordered, so the number of
        // cutoffs below u is the quadrant id (zero-width quadrants stay
        // unreachable)
        const std::uint64_t q = static_cast<std::uint64_t>(u >= cut.c00) +
                                static_cast<std::uint64_t>(u >= cut.c01) +
                                static_cast<std::uint64_t>(u >= cut.c10);
        src = (src << 1) | (q >> 1);
        tgt = (tgt << 1) | (q & 1);
    }
    return Ball{src, tgt};
}

Ball drop_one_ball(const ParamStack& theta, RngStream& stream) {
    return BdpSampler(theta).drop_one(stream);
}

std::vector<Ball> sample_bdp(const ParamStack& theta, RngStream& stream) {
    BdpSampler sampler(theta);
    std::vector<Ball> balls;
    sampler.sample(stream, [&](const Ball& b) { balls.push_back(b); });
    return balls;
}

std::vector<Ball> sample_bdp_parallel(const ParamStack& theta, std::uint64_t seed,
                                      const std::string& label, unsigned threads) {
    if (threads == 0) throw std::invalid_argument("sample_bdp_parallel: threads must be >= 1");
    BdpSampler sampler(theta);
    if (threads == 1) {
        RngStream stream(seed, label);
        std::vector<Ball> balls;
        sampler.sample(stream, [&](const Ball& b) { balls.push_back(b); });
        return balls;
    }
    const double share = sampler.rate() / static_cast<double>(threads);
    std::vector<std::vector<Ball>> partial(threads);
    std::vector<std::thread> workers;
    workers.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
        workers.emplace_back([&, w] {
            RngStream stream(seed, label + "/w" + std::to_string(w));
            const std::int64_t count = stream.poisson(share);
            partial[w].reserve(static_cast<std::size_t>(count));
            for (std::int64_t i = 0; i < count; ++i) {
                partial[w].push_back(sampler.drop_one(stream));
            }
        });
    }
    for (auto& t : workers) t.join();
    std::vector<Ball> balls;
    for (auto& p : partial) {
        balls.insert(balls.end(), p.begin(), p.end());
    }
    return balls;
}

}  // namespace kronmag
