#include <doctest.h>

#include <cmath>
#include <stdexcept>

#include "kronmag/oracle.hpp"
#include "kronmag/params.hpp"
#include "kronmag/rng.hpp"

using namespace kronmag;

namespace {

ParamStack replicated(double a, double b, double c, double d, std::uint32_t depth) {
    ParamStack stack;
    stack.levels.assign(depth, InitiatorMatrix{a, b, c, d});
    return stack;
}

ParamStack random_stack(std::uint32_t depth, RngStream& rng, double max_entry = 1.0) {
    ParamStack stack;
    for (std::uint32_t k = 0; k < depth; ++k) {
        stack.levels.push_back(InitiatorMatrix{max_entry * rng.uniform01(),
                                               max_entry * rng.uniform01(),
                                               max_entry * rng.uniform01(),
                                               max_entry * rng.uniform01()});
    }
    return stack;
}

}  // namespace

TEST_CASE("bit_of uses most-significant-first level order") {
    for (std::uint32_t k = 1; k <= 3; ++k) CHECK(bit_of(0, k, 3) == 0);
    CHECK(bit_of(7, 1, 3) == 1);
    CHECK(bit_of(7, 3, 3) == 1);
    CHECK(bit_of(4, 1, 3) == 1);
    CHECK(bit_of(4, 2, 3) == 0);
    CHECK(bit_of(4, 3, 3) == 0);

    CHECK_THROWS_AS(bit_of(8, 1, 3), std::invalid_argument);
    CHECK_THROWS_AS(bit_of(0, 0, 3), std::invalid_argument);
    CHECK_THROWS_AS(bit_of(0, 4, 3), std::invalid_argument);
}

TEST_CASE("bit order matches the Kronecker power block structure") {
    // diagonal entry (c, c) of the explicit power must equal the product of
    // the diagonal theta entries selected by bit_of
    const ParamStack theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
    const DenseMatrix gamma = build_gamma(theta);
    const std::uint64_t c = 4;
    double prod = 1.0;
    for (std::uint32_t k = 1; k <= 3; ++k) {
        const int bit = bit_of(c, k, 3);
        prod *= theta.levels[k - 1].at(bit, bit);
    }
    CHECK(gamma.at(c, c) == doctest::Approx(prod).epsilon(1e-14));
}

TEST_CASE("gamma_entry matches the explicit Kronecker power") {
    const ParamStack theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
    const DenseMatrix gamma = build_gamma(theta);
    CHECK(gamma_entry(theta, 7, 7) == doctest::Approx(0.729).epsilon(1e-12));
    CHECK(gamma_entry(theta, 7, 7) == doctest::Approx(gamma.at(7, 7)).epsilon(1e-14));
    CHECK(gamma_entry(theta, 0, 0) == doctest::Approx(0.064).epsilon(1e-12));
    CHECK(gamma_entry(theta, 0, 0) == doctest::Approx(gamma.at(0, 0)).epsilon(1e-14));

    const ParamStack ones = replicated(1, 1, 1, 1, 3);
    for (std::uint64_t c = 0; c < 8; ++c) {
        for (std::uint64_t c2 = 0; c2 < 8; ++c2) {
            CHECK(gamma_entry(ones, c, c2) == 1.0);
        }
    }

    CHECK_THROWS_AS(gamma_entry(theta, 8, 0), std::invalid_argument);
}

TEST_CASE("gamma_entry agrees with the oracle on random stacks up to d = 8") {
    RngStream rng(2024, "params/gamma");
    for (std::uint32_t d = 1; d <= 8; ++d) {
        const ParamStack theta = random_stack(d, rng, 1.3);
        const DenseMatrix gamma = build_gamma(theta);
        const std::uint64_t side = std::uint64_t{1} << d;
        std::uint64_t mismatches = 0;
        for (std::uint64_t c = 0; c < side; ++c) {
            for (std::uint64_t c2 = 0; c2 < side; ++c2) {
                const double want = gamma.at(c, c2);
                const double got = gamma_entry(theta, c, c2);
                if (std::fabs(got - want) > 1e-12 * std::max(1.0, std::fabs(want))) {
                    ++mismatches;
                }
            }
        }
        CHECK(mismatches == 0);
    }
}

TEST_CASE("psi_entry reads colors") {
    const ParamStack theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
    ColorAssignment colors;
    colors.d = 3;
    colors.colors.assign(5, 0);
    for (std::uint64_t i = 0; i < 5; ++i) {
        for (std::uint64_t j = 0; j < 5; ++j) {
            CHECK(psi_entry(theta, colors, i, j) == doctest::Approx(0.064).epsilon(1e-12));
        }
    }

    ColorAssignment single;
    single.d = 3;
    single.colors = {7};
    CHECK(psi_entry(theta, single, 0, 0) == doctest::Approx(0.729).epsilon(1e-12));

    const ParamStack ones = replicated(1, 1, 1, 1, 1);
    ColorAssignment one_pair;
    one_pair.d = 1;
    one_pair.colors = {0, 1};
    CHECK(psi_entry(ones, one_pair, 0, 1) == 1.0);

    CHECK_THROWS_AS(psi_entry(theta, single, 1, 0), std::invalid_argument);
}

TEST_CASE("expected_edges closed forms") {
    const ParamStack theta = replicated(0.4, 0.7, 0.7, 0.9, 3);
    const ExpectedEdgeSummary kpgm = expected_edges(theta, std::nullopt, 8);
    CHECK(kpgm.e_k == doctest::Approx(19.683).epsilon(1e-12));
    CHECK(kpgm.e_k == doctest::Approx(build_gamma(theta).sum()).epsilon(1e-12));
    CHECK_FALSE(kpgm.e_m.has_value());

    // mu = 0.5 at n = 2^d collapses e_M to e_K
    MuVector half;
    half.values.assign(3, 0.5);
    const ExpectedEdgeSummary at_half = expected_edges(theta, half, 8);
    CHECK(*at_half.e_m == doctest::Approx(kpgm.e_k).epsilon(1e-12));

    // d = 1 example, cross-checked against the quadratic in mu
    const ParamStack theta1 = replicated(0.15, 0.7, 0.7, 0.85, 1);
    MuVector mu02;
    mu02.values = {0.2};
    const ExpectedEdgeSummary mag = expected_edges(theta1, mu02, 2);
    CHECK(mag.e_k == doctest::Approx(2.4).epsilon(1e-12));
    CHECK(*mag.e_m == doctest::Approx(1.416).epsilon(1e-12));
    const double x = 0.2;
    const double quadratic =
        (0.15 * (1 - x) * (1 - x) + 2 * 0.7 * (1 - x) * x + 0.85 * x * x) * 4;
    CHECK(*mag.e_m == doctest::Approx(quadratic).epsilon(1e-12));
    CHECK(*mag.e_mk == doctest::Approx(2 * (0.8 * 0.85 + 0.2 * 1.55)).epsilon(1e-12));
    CHECK(*mag.e_km == doctest::Approx(*mag.e_mk).epsilon(1e-12));  // symmetric theta
}

TEST_CASE("sum of gamma entries equals e_K up to d = 10") {
    RngStream rng(55, "params/ek");
    for (std::uint32_t d : {1u, 4u, 7u, 10u}) {
        const ParamStack theta = random_stack(d, rng);
        const std::uint64_t side = std::uint64_t{1} << d;
        double sum = 0.0;
        for (std::uint64_t c = 0; c < side; ++c) {
            for (std::uint64_t c2 = 0; c2 < side; ++c2) {
                sum += gamma_entry(theta, c, c2);
            }
        }
        const double e_k = expected_edges(theta, std::nullopt, side).e_k;
        CHECK(std::fabs(sum - e_k) <= 1e-9 * std::max(1.0, std::fabs(e_k)));
    }
}

TEST_CASE("e_M at mu = 0.5, n = 2^d equals e_K for random stacks up to d = 12") {
    RngStream rng(56, "params/em");
    for (std::uint32_t d : {1u, 3u, 6u, 9u, 12u}) {
        const ParamStack theta = random_stack(d, rng);
        MuVector half;
        half.values.assign(d, 0.5);
        const ExpectedEdgeSummary summary =
            expected_edges(theta, half, std::uint64_t{1} << d);
        CHECK(std::fabs(*summary.e_m - summary.e_k) <=
              1e-12 * std::max(1.0, std::fabs(summary.e_k)));
    }
}

TEST_CASE("e_K is homogeneous of degree d in a uniform scale") {
    RngStream rng(57, "params/scale");
    const std::uint32_t d = 5;
    const ParamStack theta = random_stack(d, rng);
    const double base = expected_edges(theta, std::nullopt, 1).e_k;
    const double s = 1.7;
    ParamStack scaled = theta;
    for (auto& level : scaled.levels) {
        level.theta00 *= s;
        level.theta01 *= s;
        level.theta10 *= s;
        level.theta11 *= s;
    }
    const double want = base * std::pow(s, d);
    CHECK(expected_edges(scaled, std::nullopt, 1).e_k ==
          doctest::Approx(want).epsilon(1e-12));
}

TEST_CASE("stack and mu validation") {
    ParamStack empty;
    CHECK_THROWS_AS(empty.validate(), std::invalid_argument);

    ParamStack deep;
    deep.levels.assign(63, InitiatorMatrix{0.5, 0.5, 0.5, 0.5});
    CHECK_THROWS_AS(deep.validate(), std::invalid_argument);

    ParamStack negative = replicated(-0.1, 0.5, 0.5, 0.5, 2);
    CHECK_THROWS_AS(negative.validate(), std::invalid_argument);

    CHECK(replicated(1.2, 0, 0, 0, 1).bernoulli_valid() == false);
    CHECK(replicated(1.0, 0.3, 0.3, 0.9, 4).bernoulli_valid() == true);

    MuVector bad;
    bad.values = {0.5, 1.5};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

    ModelConfig config;
    config.d = 2;
    config.n = 0;
    config.theta = replicated(0.5, 0.5, 0.5, 0.5, 2);
    CHECK_THROWS_AS(config.validate(), std::invalid_argument);
}

TEST_CASE("theta and mu text formats") {
    const ParamStack one = parse_theta("0.4,0.7;0.7,0.9", 3, true);
    CHECK(one.depth() == 3);
    CHECK(one.levels[2].theta11 == 0.9);

    const ParamStack stack = parse_theta("1,0;0,1\n0.5,0.5;0.5,0.5", 2, false);
    CHECK(stack.levels[0].theta01 == 0.0);
    CHECK(stack.levels[1].theta10 == 0.5);

    // round trip through the canonical text form
    const ParamStack again = parse_theta(format_theta(stack), 2, false);
    for (int k = 0; k < 2; ++k) {
        CHECK(again.levels[k].theta00 == stack.levels[k].theta00);
        CHECK(again.levels[k].theta11 == stack.levels[k].theta11);
    }

    CHECK_THROWS_AS(parse_theta("0.4,0.7;0.7", 1, false), std::invalid_argument);
    CHECK_THROWS_AS(parse_theta("0.4,0.7;0.7,0.9", 2, false), std::invalid_argument);
    CHECK_THROWS_AS(parse_theta("a,b;c,d", 1, false), std::invalid_argument);

    const MuVector scalar = parse_mu("0.3", 4);
    CHECK(scalar.depth() == 4);
    CHECK(scalar.values[3] == 0.3);
    const MuVector list = parse_mu("0.1,0.9", 2);
    CHECK(list.values[1] == 0.9);
    CHECK_THROWS_AS(parse_mu("0.1,0.9,0.3", 2), std::invalid_argument);
    CHECK_THROWS_AS(parse_mu("1.2", 2), std::invalid_argument);

    CHECK(fnv1a64("") == 0xcbf29ce484222325ull);
    CHECK(fnv1a64("a") != fnv1a64("b"));
}
