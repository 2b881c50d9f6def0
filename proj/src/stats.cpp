#include "kronmag/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>

#include "kronmag/bdp.hpp"
#include "kronmag/oracle.hpp"
#include "kronmag/rng.hpp"

namespace kronmag {

namespace {

// Lower regularized incomplete gamma P(s, x) by its power series.
double gamma_p_series(double s, double x) {
    double term = 1.0 / s;
    double sum = term;
    double a = s;
    for (int i = 0; i < 10000; ++i) {
        a += 1.0;
        term *= x / a;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * 1e-16) break;
    }
    return sum * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

// Q(s, x) by the Lentz continued fraction.
double gamma_q_cf(double s, double x) {
    const double tiny = 1e-300;
    double b = x + 1.0 - s;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - s);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < 1e-16) break;
    }
    return h * std::exp(-x + s * std::log(x) - std::lgamma(s));
}

struct BinnedCounts {
    std::vector<double> expected;
    std::vector<std::int64_t> observed;
};

// Greedy left-to-right merge of count bins until every group has expected
// mass >= 5; a light final group folds into its predecessor.
BinnedCounts merge_bins(const std::vector<double>& expected,
                        const std::vector<std::int64_t>& observed) {
    BinnedCounts out;
    double e_acc = 0.0;
    std::int64_t o_acc = 0;
    for (std::size_t k = 0; k < expected.size(); ++k) {
        e_acc += expected[k];
        o_acc += observed[k];
        if (e_acc >= 5.0) {
            out.expected.push_back(e_acc);
            out.observed.push_back(o_acc);
            e_acc = 0.0;
            o_acc = 0;
        }
    }
    if (e_acc > 0.0 || o_acc > 0) {
        if (!out.expected.empty()) {
            out.expected.back() += e_acc;
            out.observed.back() += o_acc;
        } else {
            out.expected.push_back(e_acc);
            out.observed.push_back(o_acc);
        }
    }
    return out;
}

GofReport finish_report(double statistic, std::int64_t df, double alpha) {
    GofReport report;
    report.statistic = statistic;
    report.degrees_of_freedom = df;
    report.p_value = chi_square_p_value(statistic, df);
    report.pass = report.p_value >= alpha;
    return report;
}

}  // namespace

double regularized_gamma_q(double s, double x) {
    if (!(s > 0.0) || x < 0.0 || !std::isfinite(x)) {
        throw std::invalid_argument("regularized_gamma_q: need s > 0, x >= 0");
    }
    if (x == 0.0) return 1.0;
    if (x < s + 1.0) return 1.0 - gamma_p_series(s, x);
    return gamma_q_cf(s, x);
}

double chi_square_p_value(double statistic, std::int64_t df) {
    if (df < 0) throw std::invalid_argument("chi_square_p_value: df must be >= 0");
    if (df == 0) return 1.0;
    if (statistic <= 0.0) return 1.0;
    if (!std::isfinite(statistic)) return 0.0;
    return regularized_gamma_q(static_cast<double>(df) / 2.0, statistic / 2.0);
}

GofReport chi_square_poisson(std::span<const std::int64_t> samples, double rate,
                             double alpha) {
    if (samples.size() < 1000) {
        throw std::invalid_argument("chi_square_poisson: need at least 1000 samples");
    }
    if (!(rate >= 0.0) || !std::isfinite(rate)) {
        throw std::invalid_argument("chi_square_poisson: rate must be finite and >= 0");
    }
    const double n = static_cast<double>(samples.size());

    if (rate == 0.0) {
        for (std::int64_t v : samples) {
            if (v != 0) {
                GofReport report;
                report.statistic = std::numeric_limits<double>::infinity();
                report.degrees_of_freedom = 1;
                report.p_value = 0.0;
                report.pass = false;
                return report;
            }
        }
        return finish_report(0.0, 0, alpha);  // degenerate single bin
    }

    std::int64_t max_sample = 0;
    for (std::int64_t v : samples) max_sample = std::max(max_sample, v);
    const std::int64_t k_hi =
        std::max<std::int64_t>(max_sample,
                               static_cast<std::int64_t>(rate + 10.0 * std::sqrt(rate)) + 30);

    // pmf by upward recurrence; the final bin absorbs the upper tail
    std::vector<double> expected(static_cast<std::size_t>(k_hi) + 1, 0.0);
    double p = std::exp(-rate);
    double cumulative = 0.0;
    for (std::int64_t k = 0; k <= k_hi; ++k) {
        if (k > 0) p *= rate / static_cast<double>(k);
        expected[static_cast<std::size_t>(k)] = p * n;
        cumulative += p;
    }
    expected.back() += (1.0 - cumulative) * n;

    std::vector<std::int64_t> observed(expected.size(), 0);
    for (std::int64_t v : samples) {
        observed[static_cast<std::size_t>(std::min(v, k_hi))] += 1;
    }

    const BinnedCounts bins = merge_bins(expected, observed);
    double statistic = 0.0;
    for (std::size_t g = 0; g < bins.expected.size(); ++g) {
        const double diff = static_cast<double>(bins.observed[g]) - bins.expected[g];
        statistic += diff * diff / bins.expected[g];
    }
    return finish_report(statistic, static_cast<std::int64_t>(bins.expected.size()) - 1, alpha);
}

GofReport two_sample_pair_counts(const std::function<EdgeList()>& sampler_a,
                                 const std::function<EdgeList()>& sampler_b,
                                 std::uint64_t n, int runs, double alpha) {
    if (n == 0 || n > 16) {
        throw std::invalid_argument("two_sample_pair_counts: n must be in [1, 16]");
    }
    if (runs < 1000) {
        throw std::invalid_argument("two_sample_pair_counts: need at least 1000 runs");
    }
    const std::size_t pairs = static_cast<std::size_t>(n * n);

    // per-pair histograms over count values
    auto collect = [&](const std::function<EdgeList()>& sampler) {
        std::vector<std::map<std::int64_t, std::int64_t>> tables(pairs);
        std::vector<std::int64_t> counts(pairs);
        for (int r = 0; r < runs; ++r) {
            std::fill(counts.begin(), counts.end(), 0);
            const EdgeList sample = sampler();
            for (const auto& [i, j] : sample.edges) {
                counts[static_cast<std::size_t>(i * n + j)] += 1;
            }
            for (std::size_t p = 0; p < pairs; ++p) {
                tables[p][counts[p]] += 1;
            }
        }
        return tables;
    };

    const auto tables_a = collect(sampler_a);
    const auto tables_b = collect(sampler_b);
    const double n_a = runs;
    const double n_b = runs;
    const double n_total = n_a + n_b;

    double statistic = 0.0;
    std::int64_t df = 0;
    for (std::size_t p = 0; p < pairs; ++p) {
        // union of observed count values, in increasing order
        std::map<std::int64_t, std::pair<std::int64_t, std::int64_t>> merged;
        for (const auto& [value, freq] : tables_a[p]) merged[value].first += freq;
        for (const auto& [value, freq] : tables_b[p]) merged[value].second += freq;

        // group adjacent values until the pooled expectation per sample is >= 5
        std::vector<std::pair<std::int64_t, std::int64_t>> groups;
        std::int64_t acc_a = 0, acc_b = 0;
        const double min_share = std::min(n_a, n_b) / n_total;
        for (const auto& [value, freqs] : merged) {
            acc_a += freqs.first;
            acc_b += freqs.second;
            if (static_cast<double>(acc_a + acc_b) * min_share >= 5.0) {
                groups.emplace_back(acc_a, acc_b);
                acc_a = acc_b = 0;
            }
        }
        if (acc_a + acc_b > 0) {
            if (!groups.empty()) {
                groups.back().first += acc_a;
                groups.back().second += acc_b;
            } else {
                groups.emplace_back(acc_a, acc_b);
            }
        }
        if (groups.size() < 2) continue;  // degenerate pair adds no information

        for (const auto& [ga, gb] : groups) {
            const double pooled = static_cast<double>(ga + gb);
            const double ea = pooled * n_a / n_total;
            const double eb = pooled * n_b / n_total;
            const double da = static_cast<double>(ga) - ea;
            const double db = static_cast<double>(gb) - eb;
            statistic += da * da / ea + db * db / eb;
        }
        df += static_cast<std::int64_t>(groups.size()) - 1;
    }
    return finish_report(statistic, df, alpha);
}

Theorem1Report verify_theorem1(const ParamStack& theta, int runs, double alpha,
                               std::uint64_t seed, double corr_limit) {
    theta.validate();
    const std::uint32_t d = theta.depth();
    if (d > 3) throw std::invalid_argument("verify_theorem1: d must be <= 3");
    if (runs < 1000) throw std::invalid_argument("verify_theorem1: need at least 1000 runs");

    const std::size_t side = std::size_t{1} << d;
    const std::size_t cells = side * side;
    const DenseMatrix gamma = build_gamma(theta);

    // per-cell per-run counts, kept whole: cells <= 64 and runs ~ 1e5
    std::vector<std::vector<std::int64_t>> counts(cells,
                                                  std::vector<std::int64_t>(runs, 0));
    RngStream stream(seed, "theorem1/bdp");
    const BdpSampler bdp(theta);
    for (int r = 0; r < runs; ++r) {
        bdp.sample(stream, [&](const Ball& b) {
            counts[static_cast<std::size_t>(b.source_color * side + b.target_color)]
                  [static_cast<std::size_t>(r)] += 1;
        });
    }

    Theorem1Report report;
    report.pass = true;
    for (std::size_t c = 0; c < side; ++c) {
        for (std::size_t c2 = 0; c2 < side; ++c2) {
            CellGof cell;
            cell.source_color = c;
            cell.target_color = c2;
            cell.gof = chi_square_poisson(counts[c * side + c2], gamma.at(c, c2), alpha);
            report.pass = report.pass && cell.gof.pass;
            report.cells.push_back(std::move(cell));
        }
    }

    RngStream pair_stream(seed, "theorem1/pairs");
    for (int p = 0; p < 10; ++p) {
        std::size_t a = static_cast<std::size_t>(pair_stream.uniform_index(cells));
        std::size_t b = static_cast<std::size_t>(pair_stream.uniform_index(cells));
        while (b == a) b = static_cast<std::size_t>(pair_stream.uniform_index(cells));

        double sum_a = 0.0, sum_b = 0.0, sum_ab = 0.0, sum_aa = 0.0, sum_bb = 0.0;
        for (int r = 0; r < runs; ++r) {
            const double xa = static_cast<double>(counts[a][static_cast<std::size_t>(r)]);
            const double xb = static_cast<double>(counts[b][static_cast<std::size_t>(r)]);
            sum_a += xa;
            sum_b += xb;
            sum_ab += xa * xb;
            sum_aa += xa * xa;
            sum_bb += xb * xb;
        }
        const double nn = runs;
        const double cov = sum_ab / nn - (sum_a / nn) * (sum_b / nn);
        const double var_a = sum_aa / nn - (sum_a / nn) * (sum_a / nn);
        const double var_b = sum_bb / nn - (sum_b / nn) * (sum_b / nn);
        CellCorrelation corr;
        corr.cell_a = a;
        corr.cell_b = b;
        corr.r = (var_a > 0.0 && var_b > 0.0) ? cov / std::sqrt(var_a * var_b) : 0.0;
        report.max_abs_correlation = std::max(report.max_abs_correlation, std::fabs(corr.r));
        report.correlations.push_back(corr);
    }
    report.pass = report.pass && report.max_abs_correlation < corr_limit;
    return report;
}

bool verify_theorem3(std::uint32_t d, int trials, std::uint64_t seed) {
    if (d < 1 || d > 8) throw std::invalid_argument("verify_theorem3: d must be in [1, 8]");
    RngStream stream(seed, "theorem3");
    const std::uint64_t side = std::uint64_t{1} << d;
    for (int t = 0; t < trials; ++t) {
        ParamStack theta;
        MuVector mu;
        for (std::uint32_t k = 0; k < d; ++k) {
            InitiatorMatrix m;
            m.theta00 = stream.uniform01();
            m.theta01 = stream.uniform01();
            m.theta10 = stream.uniform01();
            m.theta11 = stream.uniform01();
            theta.levels.push_back(m);
            // occasionally pin a level's mu to an extreme to hit empty blocks
            const double roll = stream.uniform01();
            mu.values.push_back(roll < 0.05 ? 0.0 : roll < 0.1 ? 1.0 : stream.uniform01());
        }
        const std::uint64_t n = 1 + stream.uniform_index(3 * side);
        const ColorAssignment colors = sample_colors(mu, n, stream);
        const ColorIndex index(colors, mu, n);
        for (std::uint64_t c = 0; c < side; ++c) {
            for (std::uint64_t c2 = 0; c2 < side; ++c2) {
                const LambdaInfo info = effective_lambda(index, theta, c, c2);
                if (info.target > info.bound) return false;
            }
        }
    }
    return true;
}

GofReport verify_sampler_equivalence(const ModelConfig& config, int runs, double alpha) {
    config.validate();
    if (!config.mu) {
        throw std::invalid_argument("verify_sampler_equivalence: config must carry mu");
    }
    if (config.n > 16) {
        throw std::invalid_argument("verify_sampler_equivalence: n must be <= 16");
    }
    RngStream color_stream(config.seed, "equivalence/colors");
    const ColorAssignment colors = sample_colors(*config.mu, config.n, color_stream);

    RngStream ar_stream(config.seed, "equivalence/ar");
    RngStream oracle_stream(config.seed, "equivalence/oracle");
    const auto run_ar = [&]() { return sample_magm_ar(config, ar_stream, colors).edges; };
    const auto run_oracle = [&]() {
        return sample_poisson_exact(config, colors, oracle_stream);
    };
    return two_sample_pair_counts(run_ar, run_oracle, config.n, runs, alpha);
}

double verify_theorem2(std::uint64_t n, const MuVector& mu, int seeds,
                       std::uint64_t base_seed) {
    if (n < (std::uint64_t{1} << 10)) {
        throw std::invalid_argument("verify_theorem2: n must be >= 2^10");
    }
    if (seeds < 1) throw std::invalid_argument("verify_theorem2: need at least one seed");
    mu.validate();
    const double limit = std::log2(static_cast<double>(n));
    int ok = 0;
    for (int s = 0; s < seeds; ++s) {
        RngStream stream(base_seed, "theorem2/" + std::to_string(s));
        const ColorAssignment colors = sample_colors(mu, n, stream);
        const ColorIndex index(colors, mu, n);
        if (index.m_frequent() <= limit &&
            static_cast<double>(index.m_infrequent()) <= limit) {
            ++ok;
        }
    }
    return static_cast<double>(ok) / static_cast<double>(seeds);
}

}  // namespace kronmag
