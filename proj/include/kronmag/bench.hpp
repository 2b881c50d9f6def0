#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "kronmag/magm.hpp"
#include "kronmag/params.hpp"

namespace kronmag {

// Expected proposal-ball volume of the accept-reject sampler for a fixed
// color realization: m_F^2 e_M + m_F m_I e_MK + m_I m_F e_KM + m_I^2 e_K.
// Computable in O(nd) from the colors; this is what a hybrid selector would
// use to pick a sampler up front.
struct CostEstimate {
    double ff = 0.0;
    double fi = 0.0;
    double if_ = 0.0;
    double ii = 0.0;
    double total = 0.0;
};

CostEstimate estimate_cost(const ModelConfig& config, const ColorAssignment& colors);

struct BenchRecord {
    double mu = 0.0;
    std::uint32_t d = 0;
    std::uint64_t n = 0;
    std::string mode;
    int reps = 0;
    double mean_seconds = 0.0;
    double stddev_seconds = 0.0;
    double mean_edges = 0.0;
    double e_m = 0.0;
};

struct SweepSpec {
    enum class Variable { mu, d } variable = Variable::mu;
    double start = 0.0;
    double stop = 0.0;
    double step = 0.0;
};

// "mu=0.2:0.9:0.1" or "d=4:10:2"
SweepSpec parse_sweep(const std::string& text);

// Run the sweep: per point, `reps` sampling runs with seeds seed+rep, timing
// the in-memory sampling only. Records come out sorted by the sweep variable.
std::vector<BenchRecord> run_bench(const ModelConfig& base, const SweepSpec& sweep,
                                   const std::string& mode, int reps, unsigned threads);

void write_bench_csv(std::ostream& out, const std::vector<BenchRecord>& records);

}  // namespace kronmag
