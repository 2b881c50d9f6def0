#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "kronmag/bdp.hpp"
#include "kronmag/bench.hpp"
#include "kronmag/edgelist.hpp"
#include "kronmag/magm.hpp"
#include "kronmag/oracle.hpp"
#include "kronmag/params.hpp"
#include "kronmag/rng.hpp"
#include "kronmag/stats.hpp"

namespace {

using namespace kronmag;

std::uint64_t parse_seed(const std::string& text) {
    if (text.rfind("0x", 0) == 0 || text.rfind("0X", 0) == 0) {
        return std::stoull(text.substr(2), nullptr, 16);
    }
    return std::stoull(text);
}

std::uint64_t resolve_seed(const std::string& seed_flag) {
    if (!seed_flag.empty()) return parse_seed(seed_flag);
    if (const char* env = std::getenv("KRONMAG_SEED")) return parse_seed(env);
    return 0;
}

std::string load_theta_text(const std::string& spec) {
    if (!spec.empty() && spec.front() == '@') {
        std::ifstream in(spec.substr(1));
        if (!in) throw std::invalid_argument("cannot open theta file " + spec.substr(1));
        std::ostringstream buf;
        buf << in.rdbuf();
        return buf.str();
    }
    return spec;
}

struct SampleFlags {
    std::uint32_t d = 0;
    std::uint64_t n = 0;
    std::string theta;
    bool replicate = false;
    std::string mu;
    std::string seed;
    std::string out;
    std::string mode;
    std::string colors_path;
    std::string emit_colors_path;
    bool dedupe_output = false;
    unsigned threads = 1;
};

void add_shared_flags(CLI::App* cmd, SampleFlags& flags, bool needs_mu) {
    cmd->add_option("--d", flags.d, "number of attribute levels")->required();
    cmd->add_option("--theta", flags.theta, "theta spec 'a,b;c,d' lines or @file")->required();
    cmd->add_flag("--replicate", flags.replicate, "replicate a single theta line d times");
    cmd->add_option("--seed", flags.seed, "seed (decimal or 0x-hex); KRONMAG_SEED fallback");
    auto* mu = cmd->add_option("--mu", flags.mu, "mu list or scalar");
    if (needs_mu) mu->required();
    cmd->add_option("--threads", flags.threads, "worker threads (default 1, reproducible)");
}

ColorAssignment load_colors(const std::string& path, std::uint32_t d) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open colors file " + path);
    return read_colors(in, d);
}

void write_file(const std::string& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    body(out);
}

void print_summary(std::size_t edges, double seconds) {
    std::printf("edges=%zu seconds=%.6g\n", edges, seconds);
}

int cmd_sample_kpgm(const SampleFlags& flags) {
    const ParamStack theta = parse_theta(load_theta_text(flags.theta), flags.d, flags.replicate);
    const std::uint64_t seed = resolve_seed(flags.seed);
    const std::uint64_t n = std::uint64_t{1} << flags.d;
    if (flags.n != 0 && flags.n != n) {
        throw std::invalid_argument("KPGM mode requires n == 2^d");
    }

    const auto start = std::chrono::steady_clock::now();
    EdgeList edges;
    if (flags.mode == "bdp") {
        std::vector<Ball> balls;
        if (flags.threads > 1) {
            balls = sample_bdp_parallel(theta, seed, "kpgm/bdp", flags.threads);
        } else {
            RngStream stream(seed, "kpgm/bdp");
            balls = sample_bdp(theta, stream);
        }
        edges.edges.reserve(balls.size());
        for (const Ball& b : balls) edges.edges.emplace_back(b.source_color, b.target_color);
        edges.mode = "kpgm-bdp";
    } else if (flags.mode == "exact") {
        RngStream stream(seed, "kpgm/exact");
        edges = sample_kpgm_exact(theta, stream);
    } else {
        throw std::invalid_argument("sample-kpgm mode must be 'bdp' or 'exact'");
    }
    if (flags.dedupe_output) edges = dedupe(edges);
    const auto stop = std::chrono::steady_clock::now();

    edges.seed = seed;
    edges.d = flags.d;
    edges.n = n;
    edges.theta_digest = digest_hex(format_theta(theta));
    write_file(flags.out, [&](std::ostream& out) { write_edge_list(out, edges); });
    print_summary(edges.size(), std::chrono::duration<double>(stop - start).count());
    return 0;
}

int cmd_sample_magm(const SampleFlags& flags) {
    ModelConfig config;
    config.d = flags.d;
    config.n = flags.n;
    config.theta = parse_theta(load_theta_text(flags.theta), flags.d, flags.replicate);
    config.mu = parse_mu(flags.mu, flags.d);
    config.seed = resolve_seed(flags.seed);
    config.validate();

    std::optional<ColorAssignment> supplied;
    if (!flags.colors_path.empty()) {
        supplied = load_colors(flags.colors_path, flags.d);
    }

    const auto start = std::chrono::steady_clock::now();
    MagmSample sample;
    if (flags.mode == "ar") {
        sample = sample_magm_ar_parallel(config, "magm", flags.threads, supplied);
    } else if (flags.mode == "simple") {
        RngStream stream(config.seed, "magm");
        sample = sample_magm_simple(config, stream, supplied);
    } else if (flags.mode == "exact") {
        ColorAssignment colors;
        if (supplied) {
            colors = *supplied;
        } else {
            RngStream color_stream(config.seed, "magm/colors");
            colors = sample_colors(*config.mu, config.n, color_stream);
        }
        RngStream stream(config.seed, "magm");
        sample.edges = sample_magm_exact(config, colors, stream);
        sample.edges.seed = config.seed;
        sample.edges.theta_digest = digest_hex(format_theta(config.theta));
        sample.edges.mu_digest = digest_hex(format_mu(*config.mu));
        sample.colors = std::move(colors);
    } else {
        throw std::invalid_argument("sample-magm mode must be 'ar', 'simple', or 'exact'");
    }
    if (flags.dedupe_output) {
        const EdgeList collapsed = dedupe(sample.edges);
        sample.edges = collapsed;
    }
    const auto stop = std::chrono::steady_clock::now();

    write_file(flags.out, [&](std::ostream& out) { write_edge_list(out, sample.edges); });
    if (!flags.emit_colors_path.empty()) {
        write_file(flags.emit_colors_path,
                   [&](std::ostream& out) { write_colors(out, sample.colors); });
    }
    print_summary(sample.edges.size(), std::chrono::duration<double>(stop - start).count());
    return 0;
}

int cmd_expected_edges(const SampleFlags& flags) {
    const ParamStack theta = parse_theta(load_theta_text(flags.theta), flags.d, flags.replicate);
    std::optional<MuVector> mu;
    if (!flags.mu.empty()) mu = parse_mu(flags.mu, flags.d);
    if (mu && flags.n == 0) {
        throw std::invalid_argument("expected-edges with mu requires --n");
    }
    const ExpectedEdgeSummary summary = expected_edges(theta, mu, flags.n);
    if (mu) {
        std::printf("e_K=%.6g e_M=%.6g e_MK=%.6g e_KM=%.6g\n", summary.e_k, *summary.e_m,
                    *summary.e_mk, *summary.e_km);
    } else {
        std::printf("e_K=%.6g\n", summary.e_k);
    }
    return 0;
}

int cmd_estimate_cost(const SampleFlags& flags) {
    ModelConfig config;
    config.d = flags.d;
    config.n = flags.n;
    config.theta = parse_theta(load_theta_text(flags.theta), flags.d, flags.replicate);
    config.mu = parse_mu(flags.mu, flags.d);
    config.seed = resolve_seed(flags.seed);
    config.validate();

    ColorAssignment colors;
    if (!flags.colors_path.empty()) {
        colors = load_colors(flags.colors_path, flags.d);
    } else {
        RngStream stream(config.seed, "magm/colors");
        colors = sample_colors(*config.mu, config.n, stream);
    }
    const ColorIndex index(colors, *config.mu, config.n);
    const CostEstimate cost = estimate_cost(config, colors);
    std::printf("m_F=%.6g m_I=%llu ff=%.6g fi=%.6g if=%.6g ii=%.6g total=%.6g\n",
                index.m_frequent(), static_cast<unsigned long long>(index.m_infrequent()),
                cost.ff, cost.fi, cost.if_, cost.ii, cost.total);
    return 0;
}

struct ValidateFlags {
    int runs = 100000;
    int trials = 50;
    int seeds = 20;
    std::uint64_t t2_n = 4096;
    double alpha = 0.001;
    std::string seed;
    std::string out;
};

int cmd_validate(const ValidateFlags& flags) {
    const std::uint64_t seed = resolve_seed(flags.seed);
    std::ostringstream tsv;
    tsv << "check\tparameters\tstatistic\tp_value\tpass\n";
    char buf[256];
    const auto row = [&](const std::string& check, const std::string& params,
                         const std::string& stat, const std::string& p, bool pass) {
        tsv << check << '\t' << params << '\t' << stat << '\t' << p << '\t'
            << (pass ? "true" : "false") << '\n';
    };
    const auto fmt = [&](double v) {
        std::snprintf(buf, sizeof(buf), "%.6g", v);
        return std::string(buf);
    };

    // exact Poisson sampler against its own pmf
    {
        RngStream stream(seed, "validate/poisson");
        std::vector<std::int64_t> draws(static_cast<std::size_t>(flags.runs));
        for (auto& v : draws) v = stream.poisson(2.0);
        const GofReport report = chi_square_poisson(draws, 2.0, flags.alpha);
        row("poisson_gof", "rate=2,draws=" + std::to_string(flags.runs),
            fmt(report.statistic), fmt(report.p_value), report.pass);
    }

    // BDP cell distributions and independence
    {
        ParamStack theta = parse_theta("0.4,0.7;0.7,0.9", 2, true);
        const Theorem1Report report =
            verify_theorem1(theta, flags.runs, flags.alpha, seed);
        for (const auto& cell : report.cells) {
            row("theorem1_cell",
                "d=2,cell=(" + std::to_string(cell.source_color) + "," +
                    std::to_string(cell.target_color) + ")",
                fmt(cell.gof.statistic), fmt(cell.gof.p_value), cell.gof.pass);
        }
        row("theorem1_corr", "d=2,pairs=10", fmt(report.max_abs_correlation), "-",
            report.max_abs_correlation < 0.01);
    }

    // proposal validity by exact enumeration
    {
        const bool ok = verify_theorem3(6, flags.trials, seed);
        row("theorem3", "d=6,trials=" + std::to_string(flags.trials), ok ? "0" : ">0", "-",
            ok);
    }

    // color frequency bounds
    {
        MuVector mu;
        mu.values.assign(12, 0.3);
        const double fraction = verify_theorem2(flags.t2_n, mu, flags.seeds, seed);
        row("theorem2",
            "n=" + std::to_string(flags.t2_n) + ",mu=0.3,seeds=" + std::to_string(flags.seeds),
            fmt(fraction), "-", fraction >= 0.95);
    }

    // accept-reject sampler vs the independent-Poisson oracle
    {
        ModelConfig config;
        config.d = 2;
        config.n = 4;
        config.theta = parse_theta("0.15,0.7;0.7,0.85", 2, true);
        config.mu = parse_mu("0.7", 2);
        config.seed = seed;
        const GofReport report =
            verify_sampler_equivalence(config, std::max(1000, flags.runs / 10), flags.alpha);
        row("equivalence", "n=4,d=2,mu=0.7", fmt(report.statistic), fmt(report.p_value),
            report.pass);
    }

    if (flags.out.empty()) {
        std::cout << tsv.str();
    } else {
        write_file(flags.out, [&](std::ostream& out) { out << tsv.str(); });
    }
    return 0;
}

struct BenchFlags {
    SampleFlags sample;
    std::string sweep;
    int reps = 3;
};

int cmd_bench(const BenchFlags& flags) {
    ModelConfig config;
    config.d = flags.sample.d;
    config.n = flags.sample.n != 0 ? flags.sample.n : (std::uint64_t{1} << flags.sample.d);
    config.theta =
        parse_theta(load_theta_text(flags.sample.theta), flags.sample.d, flags.sample.replicate);
    if (!flags.sample.mu.empty()) config.mu = parse_mu(flags.sample.mu, flags.sample.d);
    config.seed = resolve_seed(flags.sample.seed);
    config.validate();

    const SweepSpec sweep = parse_sweep(flags.sweep);
    const std::string mode = flags.sample.mode.empty() ? "ar" : flags.sample.mode;
    const std::vector<BenchRecord> records =
        run_bench(config, sweep, mode, flags.reps, flags.sample.threads);
    if (flags.sample.out.empty()) {
        write_bench_csv(std::cout, records);
    } else {
        write_file(flags.sample.out,
                   [&](std::ostream& out) { write_bench_csv(out, records); });
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"samplers for Kronecker product and multiplicative attribute graph models"};
    app.require_subcommand(1);

    SampleFlags kpgm;
    auto* kpgm_cmd = app.add_subcommand("sample-kpgm", "sample a KPGM graph (exact or BDP)");
    add_shared_flags(kpgm_cmd, kpgm, false);
    kpgm_cmd->add_option("--n", kpgm.n, "node count; must equal 2^d");
    kpgm_cmd->add_option("--mode", kpgm.mode, "exact|bdp")->default_val("bdp");
    kpgm_cmd->add_option("--out", kpgm.out, "edge list output path")->required();
    kpgm_cmd->add_flag("--dedupe", kpgm.dedupe_output, "collapse duplicate edges");

    SampleFlags magm;
    auto* magm_cmd = app.add_subcommand("sample-magm", "sample a MAGM graph");
    add_shared_flags(magm_cmd, magm, true);
    magm_cmd->add_option("--n", magm.n, "node count")->required();
    magm_cmd->add_option("--mode", magm.mode, "ar|simple|exact")->default_val("ar");
    magm_cmd->add_option("--out", magm.out, "edge list output path")->required();
    magm_cmd->add_option("--colors", magm.colors_path, "ingest colors from file");
    magm_cmd->add_option("--emit-colors", magm.emit_colors_path, "write sampled colors");
    magm_cmd->add_flag("--dedupe", magm.dedupe_output, "collapse duplicate edges");

    SampleFlags expected;
    auto* expected_cmd =
        app.add_subcommand("expected-edges", "print closed-form expected edge counts");
    add_shared_flags(expected_cmd, expected, false);
    expected_cmd->add_option("--n", expected.n, "node count (needed with --mu)");

    SampleFlags cost;
    auto* cost_cmd =
        app.add_subcommand("estimate-cost", "estimate proposal-ball volume per block");
    add_shared_flags(cost_cmd, cost, true);
    cost_cmd->add_option("--n", cost.n, "node count")->required();
    cost_cmd->add_option("--colors", cost.colors_path, "ingest colors from file");

    ValidateFlags validate;
    auto* validate_cmd =
        app.add_subcommand("validate", "run the statistical verification battery (TSV)");
    validate_cmd->add_option("--runs", validate.runs, "sampling runs per check");
    validate_cmd->add_option("--trials", validate.trials, "theorem-3 enumeration trials");
    validate_cmd->add_option("--seeds", validate.seeds, "theorem-2 seeds");
    validate_cmd->add_option("--t2-n", validate.t2_n, "theorem-2 node count (>= 2^10)");
    validate_cmd->add_option("--alpha", validate.alpha, "test level");
    validate_cmd->add_option("--seed", validate.seed, "seed");
    validate_cmd->add_option("--out", validate.out, "TSV output path (default stdout)");

    BenchFlags bench;
    auto* bench_cmd = app.add_subcommand("bench", "sweep a parameter and emit timing CSV");
    add_shared_flags(bench_cmd, bench.sample, false);
    bench_cmd->add_option("--n", bench.sample.n, "node count (default 2^d)");
    bench_cmd->add_option("--mode", bench.sample.mode, "exact|bdp|ar|simple")
        ->default_val("ar");
    bench_cmd->add_option("--sweep", bench.sweep, "mu=start:stop:step or d=start:stop:step")
        ->required();
    bench_cmd->add_option("--reps", bench.reps, "repetitions per point (>= 3)");
    bench_cmd->add_option("--out", bench.sample.out, "CSV output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (kpgm_cmd->parsed()) return cmd_sample_kpgm(kpgm);
        if (magm_cmd->parsed()) return cmd_sample_magm(magm);
        if (expected_cmd->parsed()) return cmd_expected_edges(expected);
        if (cost_cmd->parsed()) return cmd_estimate_cost(cost);
        if (validate_cmd->parsed()) return cmd_validate(validate);
        if (bench_cmd->parsed()) return cmd_bench(bench);
    } catch (const std::domain_error& e) {
        std::cerr << "validity error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        std::cerr << app.help() << "\n";
        return 2;
    }
    return 0;
}
