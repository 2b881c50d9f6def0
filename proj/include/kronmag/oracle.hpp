#pragma once

#include <cstdint>
#include <vector>

#include "kronmag/edgelist.hpp"
#include "kronmag/params.hpp"
#include "kronmag/rng.hpp"

namespace kronmag {

// Brute-force reference implementations. These materialize full matrices and
// touch every node pair, so they are capped at small sizes and used as test
// fixtures and for small-scale comparison only.

struct DenseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> data;  // row-major

    DenseMatrix() = default;
    DenseMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

    double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
    double sum() const;
};

// Standard Kronecker product; refuses results above 2^26 entries.
DenseMatrix kronecker_product(const DenseMatrix& x, const DenseMatrix& y);

// Full edge-probability matrix of the stack (d <= 13).
DenseMatrix build_gamma(const ParamStack& theta);

// Each (i, j) independently Bernoulli(Gamma_ij); simple graph. Requires a
// Bernoulli-valid stack and d <= 13.
EdgeList sample_kpgm_exact(const ParamStack& theta, RngStream& stream);

// Each (i, j) independently Bernoulli(Psi_ij) given fixed colors; n <= 2^13.
EdgeList sample_magm_exact(const ModelConfig& config, const ColorAssignment& colors,
                           RngStream& stream);

// Each A_ij independently Poisson(Psi_ij); multigraph. This is the
// distributional oracle the accept-reject MAGM sampler must match.
EdgeList sample_poisson_exact(const ModelConfig& config, const ColorAssignment& colors,
                              RngStream& stream);

}  // namespace kronmag
