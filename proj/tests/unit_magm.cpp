#include <doctest.h>

#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "kronmag/bench.hpp"
#include "kronmag/magm.hpp"
#include "kronmag/oracle.hpp"
#include "kronmag/rng.hpp"
#include "kronmag/stats.hpp"

using namespace kronmag;

namespace {

ParamStack replicated(double a, double b, double c, double d, std::uint32_t depth) {
    ParamStack stack;
    stack.levels.assign(depth, InitiatorMatrix{a, b, c, d});
    return stack;
}

MuVector mu_of(std::initializer_list<double> values) {
    MuVector mu;
    mu.values = values;
    return mu;
}

MuVector mu_fill(double value, std::uint32_t d) {
    MuVector mu;
    mu.values.assign(d, value);
    return mu;
}

ColorAssignment colors_of(std::uint32_t d, std::initializer_list<std::uint64_t> values) {
    ColorAssignment colors;
    colors.d = d;
    colors.colors = values;
    return colors;
}

}  // namespace

TEST_CASE("sample_colors") {
    RngStream stream(91, "magm/colors");

    SUBCASE("degenerate mu") {
        const ColorAssignment zeros = sample_colors(mu_fill(0.0, 3), 100, stream);
        for (std::uint64_t c : zeros.colors) CHECK(c == 0);
        const ColorAssignment ones = sample_colors(mu_fill(1.0, 3), 100, stream);
        for (std::uint64_t c : ones.colors) CHECK(c == 7);
    }

    SUBCASE("bit probabilities multiply") {
        const ColorAssignment colors = sample_colors(mu_of({0.9, 0.9}), 100000, stream);
        int hits = 0;
        for (std::uint64_t c : colors.colors) hits += c == 3 ? 1 : 0;
        CHECK(std::fabs(hits / 100000.0 - 0.81) <= 0.006);
    }

    SUBCASE("mu ordering is most significant bit first") {
        const ColorAssignment colors = sample_colors(mu_of({1.0, 0.0}), 50, stream);
        for (std::uint64_t c : colors.colors) CHECK(c == 2);
    }
}

TEST_CASE("build_color_index") {
    SUBCASE("expectations and partition") {
        const ColorAssignment colors = colors_of(2, {3, 3, 3, 0});
        const ColorIndex index = build_color_index(colors, mu_of({0.9, 0.9}), 4);
        CHECK(index.expected_of(3) == doctest::Approx(3.24).epsilon(1e-12));
        CHECK(index.expected_of(0) == doctest::Approx(0.04).epsilon(1e-12));
        CHECK(index.expected_of(1) == doctest::Approx(0.36).epsilon(1e-12));
        CHECK(index.expected_of(2) == doctest::Approx(0.36).epsilon(1e-12));
        CHECK(index.is_frequent(3));
        CHECK_FALSE(index.is_frequent(0));
        CHECK_FALSE(index.is_frequent(1));
        CHECK(index.count(3) == 3);
        CHECK(index.count(0) == 1);
        CHECK(index.count(2) == 0);
        CHECK(index.max_multiplicity() == 3);
    }

    SUBCASE("mu = 0.5 and n = 2^d makes every color frequent") {
        const ColorAssignment colors = colors_of(2, {0, 1, 2, 3});
        const ColorIndex index = build_color_index(colors, mu_fill(0.5, 2), 4);
        for (std::uint64_t c = 0; c < 4; ++c) {
            CHECK(index.expected_of(c) == 1.0);
            CHECK(index.is_frequent(c));
        }
        CHECK(index.m_infrequent() == 0);
        CHECK(index.m_frequent() == doctest::Approx(1.0));
    }

    SUBCASE("no realized frequent color gives m_F = 0") {
        const ColorAssignment colors = colors_of(2, {0, 0, 0, 0});
        const ColorIndex index = build_color_index(colors, mu_of({0.9, 0.9}), 4);
        CHECK(index.m_infrequent() == 4);
        CHECK(index.m_frequent() == 0.0);
    }

    SUBCASE("counts sum to n and stay below m") {
        RngStream stream(92, "magm/index");
        const MuVector mu = mu_fill(0.6, 5);
        const ColorAssignment colors = sample_colors(mu, 500, stream);
        const ColorIndex index = build_color_index(colors, mu, 500);
        std::uint64_t total = 0;
        for (const auto& entry : index.realized()) {
            total += entry.count;
            CHECK(entry.count <= index.max_multiplicity());
            CHECK(index.count(entry.color) == entry.count);
            CHECK(index.members_of(entry).size() == entry.count);
        }
        CHECK(total == 500);
    }
}

TEST_CASE("build_proposals closed forms") {
    SUBCASE("m_F = 1, m_I = 0 at d = 1 reduces the FF stack to theta") {
        const ColorAssignment colors = colors_of(1, {0, 1});
        const MuVector mu = mu_fill(0.5, 1);
        const ColorIndex index = build_color_index(colors, mu, 2);
        CHECK(index.m_frequent() == doctest::Approx(1.0));
        CHECK(index.m_infrequent() == 0);
        const ParamStack theta = replicated(0.15, 0.7, 0.7, 0.85, 1);
        const ProposalFamily family = build_proposals(index, theta, mu, 2);
        const auto& ff = family.stack(Block::ff).levels[0];
        CHECK(ff.theta00 == doctest::Approx(0.15).epsilon(1e-12));
        CHECK(ff.theta01 == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(ff.theta10 == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(ff.theta11 == doctest::Approx(0.85).epsilon(1e-12));
        // the other three stacks are empty
        for (Block b : {Block::fi, Block::if_, Block::ii}) {
            CHECK(family.stack(b).levels[0].total() == 0.0);
        }
    }

    SUBCASE("m_I = 2 at d = 1 gives the II bound 4 theta") {
        const ColorAssignment colors = colors_of(1, {0, 0});
        const MuVector mu = mu_fill(0.9, 1);
        const ColorIndex index = build_color_index(colors, mu, 2);
        CHECK(index.m_infrequent() == 2);
        const ParamStack theta = replicated(0.15, 0.7, 0.7, 0.85, 1);
        const LambdaInfo info = effective_lambda(index, theta, 0, 0);
        CHECK(info.block == Block::ii);
        CHECK(info.bound == doctest::Approx(4 * 0.15).epsilon(1e-12));
        const ProposalFamily family = build_proposals(index, theta, mu, 2);
        CHECK(family.stack(Block::ii).levels[0].theta11 ==
              doctest::Approx(4 * 0.85).epsilon(1e-12));
    }

    SUBCASE("per-block total rates match the cost formula terms") {
        RngStream stream(93, "magm/proposals");
        const std::uint32_t d = 6;
        const std::uint64_t n = 128;
        const ParamStack theta = replicated(0.35, 0.52, 0.52, 0.95, d);
        const MuVector mu = mu_fill(0.35, d);
        const ColorAssignment colors = sample_colors(mu, n, stream);
        const ColorIndex index = build_color_index(colors, mu, n);
        const ProposalFamily family = build_proposals(index, theta, mu, n);
        const ExpectedEdgeSummary summary = expected_edges(theta, mu, n);
        const double mf = index.m_frequent();
        const double mi = static_cast<double>(index.m_infrequent());

        const double want[4] = {mf * mf * *summary.e_m, mf * mi * *summary.e_mk,
                                mi * mf * *summary.e_km, mi * mi * summary.e_k};
        for (int b = 0; b < 4; ++b) {
            double rate = 1.0;
            for (const auto& level : family.stacks[static_cast<std::size_t>(b)].levels) {
                rate *= level.total();
            }
            if (want[b] == 0.0) {
                CHECK(rate == 0.0);
            } else {
                CHECK(rate == doctest::Approx(want[b]).epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("effective_lambda") {
    SUBCASE("zero count means zero target") {
        const ColorAssignment colors = colors_of(2, {0, 0, 1, 3});
        const MuVector mu = mu_of({0.6, 0.6});
        const ColorIndex index = build_color_index(colors, mu, 4);
        const ParamStack theta = replicated(0.4, 0.7, 0.7, 0.9, 2);
        const LambdaInfo info = effective_lambda(index, theta, 2, 2);
        CHECK(info.target == 0.0);
        CHECK(info.target <= info.bound);
    }

    SUBCASE("frequent pair ratio never exceeds one") {
        RngStream stream(94, "magm/lambda");
        const std::uint32_t d = 4;
        const std::uint64_t n = 40;
        const MuVector mu = mu_fill(0.55, d);
        const ParamStack theta = replicated(0.3, 0.6, 0.6, 0.9, d);
        const ColorAssignment colors = sample_colors(mu, n, stream);
        const ColorIndex index = build_color_index(colors, mu, n);
        for (std::uint64_t c = 0; c < 16; ++c) {
            for (std::uint64_t c2 = 0; c2 < 16; ++c2) {
                const LambdaInfo info = effective_lambda(index, theta, c, c2);
                CHECK(info.target <= info.bound);
            }
        }
    }

    SUBCASE("exhaustive randomized enumeration up to d = 8") {
        CHECK(verify_theorem3(8, 20, 4321));
    }
}

TEST_CASE("sample_magm_ar distributions") {
    SUBCASE("mu = 0 gives Poisson(n^2 Gamma_00) edge totals") {
        ModelConfig config;
        config.d = 2;
        config.n = 4;
        config.theta = replicated(0.15, 0.7, 0.7, 0.85, 2);
        config.mu = mu_fill(0.0, 2);
        config.seed = 95;
        RngStream stream(95, "magm/mu0");
        const double rate = 16.0 * gamma_entry(config.theta, 0, 0);
        const int runs = 100000;
        std::vector<std::int64_t> totals(runs);
        for (int r = 0; r < runs; ++r) {
            const MagmSample sample = sample_magm_ar(config, stream);
            for (std::uint64_t c : sample.colors.colors) CHECK(c == 0);
            totals[static_cast<std::size_t>(r)] =
                static_cast<std::int64_t>(sample.edges.size());
        }
        CHECK(chi_square_poisson(totals, rate, 0.001).pass);
    }

    SUBCASE("n = 1 gives Poisson(psi_11) self-loops") {
        ModelConfig config;
        config.d = 1;
        config.n = 1;
        config.theta = replicated(0.3, 0.6, 0.6, 0.9, 1);
        config.mu = mu_fill(1.0, 1);
        config.seed = 96;
        RngStream stream(96, "magm/n1");
        const int runs = 100000;
        std::vector<std::int64_t> totals(runs);
        for (int r = 0; r < runs; ++r) {
            const MagmSample sample = sample_magm_ar(config, stream);
            for (const auto& [i, j] : sample.edges.edges) {
                CHECK(i == 0);
                CHECK(j == 0);
            }
            totals[static_cast<std::size_t>(r)] =
                static_cast<std::int64_t>(sample.edges.size());
        }
        CHECK(chi_square_poisson(totals, 0.9, 0.001).pass);
    }

    SUBCASE("matches the Poisson oracle on fixed colors") {
        ModelConfig config;
        config.d = 2;
        config.n = 4;
        config.theta = replicated(0.15, 0.7, 0.7, 0.85, 2);
        config.mu = mu_fill(0.7, 2);
        config.seed = 97;
        const GofReport report = verify_sampler_equivalence(config, 30000, 0.001);
        CHECK(report.pass);
    }

    SUBCASE("unconditional mean edges track e_M") {
        ModelConfig config;
        config.d = 8;
        config.n = 256;
        config.theta = replicated(0.15, 0.7, 0.7, 0.85, 8);
        config.mu = mu_fill(0.5, 8);
        config.seed = 98;
        RngStream stream(98, "magm/mean");
        const ExpectedEdgeSummary summary =
            expected_edges(config.theta, config.mu, config.n);
        const int runs = 200;
        double total = 0.0, total_sq = 0.0;
        for (int r = 0; r < runs; ++r) {
            const double count =
                static_cast<double>(sample_magm_ar(config, stream).edges.size());
            total += count;
            total_sq += count * count;
        }
        const double mean = total / runs;
        const double sd = std::sqrt(std::max(0.0, total_sq / runs - mean * mean));
        CHECK(std::fabs(mean - *summary.e_m) <= 5.0 * sd / std::sqrt(runs));
    }

    SUBCASE("proposal volume matches the cost estimate on fixed colors") {
        ModelConfig config;
        config.d = 3;
        config.n = 16;
        config.theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
        config.mu = mu_fill(0.6, 3);
        config.seed = 99;
        RngStream color_stream(99, "magm/cost/colors");
        const ColorAssignment colors = sample_colors(*config.mu, config.n, color_stream);
        const CostEstimate cost = estimate_cost(config, colors);

        RngStream stream(99, "magm/cost");
        const int runs = 1000;
        double total = 0.0;
        for (int r = 0; r < runs; ++r) {
            const MagmSample sample = sample_magm_ar(config, stream, colors);
            total += static_cast<double>(sample.stats.proposed_total());
        }
        const double se = std::sqrt(cost.total / runs);
        CHECK(std::fabs(total / runs - cost.total) <= 5.0 * se);
    }
}

TEST_CASE("sample_magm_simple") {
    SUBCASE("all colors distinct reduces the proposal to plain BDP") {
        ModelConfig config;
        config.d = 2;
        config.n = 4;
        config.theta = replicated(0.4, 0.7, 0.7, 0.9, 2);
        config.mu = mu_fill(0.5, 2);
        config.seed = 101;
        const ColorAssignment colors = colors_of(2, {0, 1, 2, 3});
        RngStream stream(101, "magm/simple/m1");
        const int runs = 20000;
        double proposals = 0.0;
        for (int r = 0; r < runs; ++r) {
            const MagmSample sample = sample_magm_simple(config, stream, colors);
            proposals += static_cast<double>(sample.stats.proposed_total());
        }
        const double e_k = 7.29;
        CHECK(std::fabs(proposals / runs - e_k) <= 5.0 * std::sqrt(e_k / runs));
    }

    SUBCASE("mean proposals equal m^2 e_K") {
        ModelConfig config;
        config.d = 3;
        config.n = 6;
        config.theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
        config.mu = mu_fill(0.5, 3);
        config.seed = 102;
        // max multiplicity 2
        const ColorAssignment colors = colors_of(3, {0, 0, 1, 2, 3, 4});
        RngStream stream(102, "magm/simple/m2");
        const int runs = 10000;
        double proposals = 0.0;
        for (int r = 0; r < runs; ++r) {
            proposals += static_cast<double>(
                sample_magm_simple(config, stream, colors).stats.proposed_total());
        }
        const double want = 4.0 * 19.683;
        CHECK(std::fabs(proposals / runs - want) <= 5.0 * std::sqrt(want / runs));
    }

    SUBCASE("matches the Poisson oracle on fixed colors") {
        ModelConfig config;
        config.d = 2;
        config.n = 4;
        config.theta = replicated(0.15, 0.7, 0.7, 0.85, 2);
        config.mu = mu_fill(0.7, 2);
        config.seed = 103;
        RngStream color_stream(103, "magm/simple/colors");
        const ColorAssignment colors = sample_colors(*config.mu, config.n, color_stream);
        RngStream simple_stream(103, "magm/simple/run");
        RngStream oracle_stream(103, "magm/simple/oracle");
        const GofReport report = two_sample_pair_counts(
            [&] { return sample_magm_simple(config, simple_stream, colors).edges; },
            [&] { return sample_poisson_exact(config, colors, oracle_stream); },
            config.n, 30000, 0.001);
        CHECK(report.pass);
    }
}

TEST_CASE("dedupe") {
    EdgeList empty;
    CHECK(dedupe(empty).edges.empty());

    EdgeList list;
    list.edges = {{1, 2}, {1, 2}, {0, 3}};
    const EdgeList clean = dedupe(list);
    REQUIRE(clean.size() == 2);
    CHECK(clean.edges[0] == std::pair<std::uint64_t, std::uint64_t>{0, 3});
    CHECK(clean.edges[1] == std::pair<std::uint64_t, std::uint64_t>{1, 2});

    RngStream stream(104, "dedupe");
    EdgeList random;
    for (int i = 0; i < 5000; ++i) {
        random.edges.emplace_back(stream.uniform_index(30), stream.uniform_index(30));
    }
    std::set<std::pair<std::uint64_t, std::uint64_t>> distinct(random.edges.begin(),
                                                               random.edges.end());
    CHECK(dedupe(random).size() == distinct.size());
}

TEST_CASE("validity and argument errors") {
    ModelConfig config;
    config.d = 2;
    config.n = 4;
    config.theta = replicated(0.5, 1.3, 0.5, 0.5, 2);
    config.mu = mu_fill(0.5, 2);
    RngStream stream(105, "magm/errors");
    CHECK_THROWS_AS(sample_magm_ar(config, stream), std::domain_error);
    CHECK_THROWS_AS(sample_magm_simple(config, stream), std::domain_error);

    ModelConfig no_mu;
    no_mu.d = 2;
    no_mu.n = 4;
    no_mu.theta = replicated(0.5, 0.5, 0.5, 0.5, 2);
    CHECK_THROWS_AS(sample_magm_ar(no_mu, stream), std::invalid_argument);

    ModelConfig good = no_mu;
    good.mu = mu_fill(0.5, 2);
    const ColorAssignment wrong_d = colors_of(3, {0, 1, 2, 3});
    CHECK_THROWS_AS(sample_magm_ar(good, stream, wrong_d), std::invalid_argument);
}

TEST_CASE("parallel accept-reject sampler") {
    ModelConfig config;
    config.d = 4;
    config.n = 64;
    config.theta = replicated(0.15, 0.7, 0.7, 0.85, 4);
    config.mu = mu_fill(0.6, 4);
    config.seed = 106;

    const MagmSample a = sample_magm_ar_parallel(config, "par", 2);
    const MagmSample b = sample_magm_ar_parallel(config, "par", 2);
    CHECK(a.edges.edges == b.edges.edges);

    // threads = 1 collapses to the sequential sampler on the labeled stream
    const MagmSample c = sample_magm_ar_parallel(config, "par", 1);
    RngStream stream(config.seed, "par");
    const MagmSample d = sample_magm_ar(config, stream);
    CHECK(c.edges.edges == d.edges.edges);

    // same expected edge volume through the parallel path
    const ExpectedEdgeSummary summary = expected_edges(config.theta, config.mu, config.n);
    const int runs = 400;
    double total = 0.0, total_sq = 0.0;
    for (int r = 0; r < runs; ++r) {
        ModelConfig rep = config;
        rep.seed = 10000 + static_cast<std::uint64_t>(r);
        const double count =
            static_cast<double>(sample_magm_ar_parallel(rep, "par", 2).edges.size());
        total += count;
        total_sq += count * count;
    }
    const double mean = total / runs;
    const double sd = std::sqrt(std::max(0.0, total_sq / runs - mean * mean));
    CHECK(std::fabs(mean - *summary.e_m) <= 5.0 * sd / std::sqrt(runs));
}
