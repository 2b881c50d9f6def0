#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "kronmag/edgelist.hpp"
#include "kronmag/magm.hpp"
#include "kronmag/params.hpp"

namespace kronmag {

struct GofReport {
    double statistic = 0.0;
    std::int64_t degrees_of_freedom = 0;
    double p_value = 1.0;
    bool pass = true;  // p_value >= alpha
};

// Upper regularized incomplete gamma Q(s, x); series/continued-fraction
// evaluation, good to ~1e-12 for the shape range used here (s <= ~100).
double regularized_gamma_q(double s, double x);

// chi-square survival function, i.e. Q(df/2, x/2); df == 0 gives 1.
double chi_square_p_value(double statistic, std::int64_t df);

// Goodness of fit of integer samples against Poisson(rate). Count bins are
// tail- and head-merged until every expected bin count is >= 5. Requires at
// least 1000 samples.
GofReport chi_square_poisson(std::span<const std::int64_t> samples, double rate,
                             double alpha);

// Two-sample chi-square on the joint per-pair count tables of two edge
// samplers over n nodes, each run `runs` times. Per-pair sub-tables are
// independent under the Poisson model, so statistics and degrees of freedom
// add across pairs.
GofReport two_sample_pair_counts(const std::function<EdgeList()>& sampler_a,
                                 const std::function<EdgeList()>& sampler_b,
                                 std::uint64_t n, int runs, double alpha);

struct CellGof {
    std::uint64_t source_color = 0;
    std::uint64_t target_color = 0;
    GofReport gof;
};

struct CellCorrelation {
    std::size_t cell_a = 0;  // flat index c * 2^d + c'
    std::size_t cell_b = 0;
    double r = 0.0;
};

struct Theorem1Report {
    std::vector<CellGof> cells;
    std::vector<CellCorrelation> correlations;
    double max_abs_correlation = 0.0;
    bool pass = false;
};

// BDP cell counts are independent Poisson(Gamma_cc'): chi-square per cell
// plus sample correlations for 10 random cell pairs (|r| must stay below
// corr_limit). d <= 3.
Theorem1Report verify_theorem1(const ParamStack& theta, int runs, double alpha,
                               std::uint64_t seed, double corr_limit = 0.01);

// Proposal validity: for `trials` randomized (theta, mu, n, colors) instances
// enumerate every color pair and require target <= bound exactly. d <= 8.
bool verify_theorem3(std::uint32_t d, int trials, std::uint64_t seed);

// Accept-reject sampler vs the independent-Poisson oracle on fixed colors.
// n <= 16.
GofReport verify_sampler_equivalence(const ModelConfig& config, int runs, double alpha);

// Fraction of seeds with m_F <= log2(n) and m_I <= log2(n). n >= 2^10.
double verify_theorem2(std::uint64_t n, const MuVector& mu, int seeds,
                       std::uint64_t base_seed);

}  // namespace kronmag
