#include "kronmag/bench.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "kronmag/bdp.hpp"
#include "kronmag/oracle.hpp"

namespace kronmag {

CostEstimate estimate_cost(const ModelConfig& config, const ColorAssignment& colors) {
    config.validate();
    if (!config.mu) throw std::invalid_argument("estimate_cost: config must carry mu");
    const ColorIndex index(colors, *config.mu, config.n);
    const ExpectedEdgeSummary edges = expected_edges(config.theta, config.mu, config.n);
    const double mf = index.m_frequent();
    const double mi = static_cast<double>(index.m_infrequent());
    CostEstimate cost;
    cost.ff = mf * mf * *edges.e_m;
    cost.fi = mf * mi * *edges.e_mk;
    cost.if_ = mi * mf * *edges.e_km;
    cost.ii = mi * mi * edges.e_k;
    cost.total = cost.ff + cost.fi + cost.if_ + cost.ii;
    return cost;
}

SweepSpec parse_sweep(const std::string& text) {
    const auto eq = text.find('=');
    if (eq == std::string::npos) {
        throw std::invalid_argument("sweep must look like mu=start:stop:step or d=...");
    }
    const std::string var = text.substr(0, eq);
    SweepSpec spec;
    if (var == "mu") {
        spec.variable = SweepSpec::Variable::mu;
    } else if (var == "d") {
        spec.variable = SweepSpec::Variable::d;
    } else {
        throw std::invalid_argument("sweep variable must be 'mu' or 'd'");
    }
    const std::string range = text.substr(eq + 1);
    const auto c1 = range.find(':');
    if (c1 == std::string::npos) {
        // single point
        spec.start = spec.stop = std::stod(range);
        spec.step = 1.0;
        return spec;
    }
    const auto c2 = range.find(':', c1 + 1);
    if (c2 == std::string::npos) {
        throw std::invalid_argument("sweep range must be start:stop:step");
    }
    spec.start = std::stod(range.substr(0, c1));
    spec.stop = std::stod(range.substr(c1 + 1, c2 - c1 - 1));
    spec.step = std::stod(range.substr(c2 + 1));
    if (!(spec.step > 0.0) || spec.stop < spec.start) {
        throw std::invalid_argument("sweep range must have positive step and stop >= start");
    }
    return spec;
}

namespace {

struct RunResult {
    double seconds = 0.0;
    std::uint64_t edges = 0;
};

RunResult run_once(const ModelConfig& config, const std::string& mode, unsigned threads) {
    const auto start = std::chrono::steady_clock::now();
    std::uint64_t edge_count = 0;
    if (mode == "ar") {
        if (threads > 1) {
            edge_count = sample_magm_ar_parallel(config, "bench", threads).edges.size();
        } else {
            RngStream stream(config.seed, "bench");
            edge_count = sample_magm_ar(config, stream).edges.size();
        }
    } else if (mode == "simple") {
        RngStream stream(config.seed, "bench");
        edge_count = sample_magm_simple(config, stream).edges.size();
    } else if (mode == "bdp") {
        std::uint64_t balls = 0;
        if (threads > 1) {
            balls = sample_bdp_parallel(config.theta, config.seed, "bench", threads).size();
        } else {
            RngStream stream(config.seed, "bench");
            const BdpSampler bdp(config.theta);
            bdp.sample(stream, [&](const Ball&) { ++balls; });
        }
        edge_count = balls;
    } else if (mode == "exact") {
        RngStream stream(config.seed, "bench");
        if (config.mu) {
            RngStream color_stream(config.seed, "bench/colors");
            const ColorAssignment colors = sample_colors(*config.mu, config.n, color_stream);
            edge_count = sample_magm_exact(config, colors, stream).edges.size();
        } else {
            edge_count = sample_kpgm_exact(config.theta, stream).edges.size();
        }
    } else {
        throw std::invalid_argument("bench mode must be exact, bdp, ar, or simple");
    }
    const auto stop = std::chrono::steady_clock::now();
    RunResult out;
    out.seconds = std::chrono::duration<double>(stop - start).count();
    out.edges = edge_count;
    return out;
}

}  // namespace

std::vector<BenchRecord> run_bench(const ModelConfig& base, const SweepSpec& sweep,
                                   const std::string& mode, int reps, unsigned threads) {
    if (reps < 3) throw std::invalid_argument("bench requires reps >= 3");
    std::vector<BenchRecord> records;

    std::vector<double> points;
    for (double v = sweep.start; v <= sweep.stop + 1e-12; v += sweep.step) points.push_back(v);

    for (double point : points) {
        ModelConfig config = base;
        if (sweep.variable == SweepSpec::Variable::mu) {
            if (!config.mu) throw std::invalid_argument("mu sweep requires a mu-bearing config");
            config.mu->values.assign(config.d, point);
        } else {
            const auto d = static_cast<std::uint32_t>(std::llround(point));
            if (d < 1 || d > 62) throw std::invalid_argument("d sweep value out of range");
            if (base.theta.levels.size() != 1 && base.theta.levels.size() != d) {
                throw std::invalid_argument(
                    "d sweep requires a single replicated theta matrix");
            }
            config.d = d;
            config.theta.levels.assign(d, base.theta.levels.front());
            if (config.mu) config.mu->values.assign(d, base.mu->values.front());
            config.n = std::uint64_t{1} << d;
        }
        config.validate();

        BenchRecord record;
        record.mu = config.mu ? config.mu->values.front() : 0.0;
        record.d = config.d;
        record.n = config.n;
        record.mode = mode;
        record.reps = reps;
        const ExpectedEdgeSummary summary = expected_edges(config.theta, config.mu, config.n);
        record.e_m = config.mu ? *summary.e_m : summary.e_k;

        double sum = 0.0, sum_sq = 0.0, edge_sum = 0.0;
        for (int rep = 0; rep < reps; ++rep) {
            ModelConfig rep_config = config;
            rep_config.seed = config.seed + static_cast<std::uint64_t>(rep);
            const RunResult result = run_once(rep_config, mode, threads);
            sum += result.seconds;
            sum_sq += result.seconds * result.seconds;
            edge_sum += static_cast<double>(result.edges);
        }
        const double mean = sum / reps;
        const double var = std::max(0.0, sum_sq / reps - mean * mean);
        record.mean_seconds = mean;
        record.stddev_seconds = std::sqrt(var);
        record.mean_edges = edge_sum / reps;
        records.push_back(record);
    }
    return records;
}

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records) {
    out << "mu,d,n,mode,reps,mean_seconds,stddev_seconds,mean_edges,e_M\n";
    char buf[256];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof(buf), "%.17g,%u,%llu,%s,%d,%.6g,%.6g,%.17g,%.17g",
                      r.mu, r.d, static_cast<unsigned long long>(r.n), r.mode.c_str(),
                      r.reps, r.mean_seconds, r.stddev_seconds, r.mean_edges, r.e_m);
        out << buf << '\n';
    }
}

}  // namespace kronmag
