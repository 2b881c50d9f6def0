#include "kronmag/oracle.hpp"

#include <stdexcept>

namespace kronmag {

namespace {

constexpr std::size_t kMaxEntries = std::size_t{1} << 26;
constexpr std::uint32_t kMaxOracleDepth = 13;

void require_bernoulli_valid(const ParamStack& theta) {
    for (std::size_t k = 0; k < theta.levels.size(); ++k) {
        const auto& m = theta.levels[k];
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                if (m.at(a, b) > 1.0) {
                    throw std::domain_error(
                        "theta[" + std::to_string(k) + "] entry (" + std::to_string(a) +
                        "," + std::to_string(b) + ") = " + std::to_string(m.at(a, b)) +
                        " exceeds 1; exact sampling needs probabilities");
                }
            }
        }
    }
}

}  // namespace

double DenseMatrix::sum() const {
    double s = 0.0;
    for (double v : data) s += v;
    return s;
}

DenseMatrix kronecker_product(const DenseMatrix& x, const DenseMatrix& y) {
    if (x.data.empty() || y.data.empty()) {
        throw std::invalid_argument("kronecker_product: matrices must be non-empty");
    }
    const std::size_t rows = x.rows * y.rows;
    const std::size_t cols = x.cols * y.cols;
    if (rows == 0 || cols == 0 || rows > kMaxEntries / cols) {
        throw std::length_error("kronecker_product: result exceeds 2^26 entries");
    }
    DenseMatrix out(rows, cols);
    for (std::size_t i = 0; i < x.rows; ++i) {
        for (std::size_t j = 0; j < x.cols; ++j) {
            const double xij = x.at(i, j);
            for (std::size_t p = 0; p < y.rows; ++p) {
                for (std::size_t q = 0; q < y.cols; ++q) {
                    out.at(i * y.rows + p, j * y.cols + q) = xij * y.at(p, q);
                }
            }
        }
    }
    return out;
}

DenseMatrix build_gamma(const ParamStack& theta) {
    theta.validate();
    if (theta.depth() > kMaxOracleDepth) {
        throw std::length_error("build_gamma: depth must be <= 13");
    }
    DenseMatrix gamma(2, 2);
    gamma.at(0, 0) = theta.levels[0].theta00;
    gamma.at(0, 1) = theta.levels[0].theta01;
    gamma.at(1, 0) = theta.levels[0].theta10;
    gamma.at(1, 1) = theta.levels[0].theta11;
    for (std::uint32_t k = 1; k < theta.depth(); ++k) {
        DenseMatrix level(2, 2);
        level.at(0, 0) = theta.levels[k].theta00;
        level.at(0, 1) = theta.levels[k].theta01;
        level.at(1, 0) = theta.levels[k].theta10;
        level.at(1, 1) = theta.levels[k].theta11;
        gamma = kronecker_product(gamma, level);
    }
    return gamma;
}

EdgeList sample_kpgm_exact(const ParamStack& theta, RngStream& stream) {
    theta.validate();
    if (theta.depth() > kMaxOracleDepth) {
        throw std::length_error("sample_kpgm_exact: depth must be <= 13");
    }
    require_bernoulli_valid(theta);
    const DenseMatrix gamma = build_gamma(theta);
    EdgeList out;
    out.mode = "kpgm-exact";
    out.d = theta.depth();
    out.n = gamma.rows;
    for (std::size_t i = 0; i < gamma.rows; ++i) {
        for (std::size_t j = 0; j < gamma.cols; ++j) {
            if (stream.bernoulli(gamma.at(i, j))) out.edges.emplace_back(i, j);
        }
    }
    return out;
}

EdgeList sample_magm_exact(const ModelConfig& config, const ColorAssignment& colors,
                           RngStream& stream) {
    config.validate();
    colors.validate();
    if (config.n > (std::uint64_t{1} << kMaxOracleDepth)) {
        throw std::length_error("sample_magm_exact: n must be <= 2^13");
    }
    if (colors.node_count() != config.n) {
        throw std::invalid_argument("sample_magm_exact: colors/node count mismatch");
    }
    require_bernoulli_valid(config.theta);
    EdgeList out;
    out.mode = "magm-exact";
    out.d = config.d;
    out.n = config.n;
    for (std::uint64_t i = 0; i < config.n; ++i) {
        for (std::uint64_t j = 0; j < config.n; ++j) {
            const double psi = gamma_entry(config.theta, colors.colors[i], colors.colors[j]);
            if (stream.bernoulli(psi)) out.edges.emplace_back(i, j);
        }
    }
    return out;
}

EdgeList sample_poisson_exact(const ModelConfig& config, const ColorAssignment& colors,
                              RngStream& stream) {
    config.validate();
    colors.validate();
    if (config.n > (std::uint64_t{1} << kMaxOracleDepth)) {
        throw std::length_error("sample_poisson_exact: n must be <= 2^13");
    }
    if (colors.node_count() != config.n) {
        throw std::invalid_argument("sample_poisson_exact: colors/node count mismatch");
    }
    EdgeList out;
    out.mode = "poisson-exact";
    out.d = config.d;
    out.n = config.n;
    for (std::uint64_t i = 0; i < config.n; ++i) {
        for (std::uint64_t j = 0; j < config.n; ++j) {
            const double psi = gamma_entry(config.theta, colors.colors[i], colors.colors[j]);
            const std::int64_t count = stream.poisson(psi);
            for (std::int64_t r = 0; r < count; ++r) out.edges.emplace_back(i, j);
        }
    }
    return out;
}

}  // namespace kronmag
