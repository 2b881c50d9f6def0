#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace kronmag {

// One 2x2 initiator matrix. Entries are non-negative weights; they are only
// required to be <= 1 when the matrix is used as a Bernoulli edge probability
// (exact KPGM/MAGM sampling). BDP proposals may exceed 1.
struct InitiatorMatrix {
    double theta00 = 0.0;
    double theta01 = 0.0;
    double theta10 = 0.0;
    double theta11 = 0.0;

    double total() const { return theta00 + theta01 + theta10 + theta11; }
    bool bernoulli_valid() const {
        return theta00 <= 1.0 && theta01 <= 1.0 && theta10 <= 1.0 && theta11 <= 1.0;
    }
    // entry by row/column bit
    double at(int a, int b) const {
        return a == 0 ? (b == 0 ? theta00 : theta01) : (b == 0 ? theta10 : theta11);
    }
    void validate() const;  // throws std::invalid_argument on negative/non-finite entries
};

// The d-level stack of initiator matrices (one per attribute level).
struct ParamStack {
    std::vector<InitiatorMatrix> levels;

    std::uint32_t depth() const { return static_cast<std::uint32_t>(levels.size()); }
    std::uint64_t color_count() const { return std::uint64_t{1} << depth(); }
    bool bernoulli_valid() const;
    void validate() const;  // depth in [1, 62], entries valid
};

// Per-level attribute probabilities mu^(k), each in [0, 1].
struct MuVector {
    std::vector<double> values;

    std::uint32_t depth() const { return static_cast<std::uint32_t>(values.size()); }
    void validate() const;
};

// Per-node colors: c_i is the integer whose d binary digits are node i's
// attribute bits, most significant bit first.
struct ColorAssignment {
    std::uint32_t d = 0;
    std::vector<std::uint64_t> colors;

    std::uint64_t node_count() const { return colors.size(); }
    void validate() const;
};

struct ModelConfig {
    std::uint32_t d = 0;
    std::uint64_t n = 0;  // node count; need not equal 2^d except in KPGM mode
    ParamStack theta;
    std::optional<MuVector> mu;  // absent for pure KPGM
    std::uint64_t seed = 0;

    void validate() const;
};

struct ExpectedEdgeSummary {
    double e_k = 0.0;
    std::optional<double> e_m;
    std::optional<double> e_mk;
    std::optional<double> e_km;
};

// k-th digit (k = 1 is the most significant of the d bits) of a zero-based
// color or node index.
int bit_of(std::uint64_t index, std::uint32_t k, std::uint32_t d);

// Entry (c, c2) of the d-fold Kronecker product of the stack, computed as the
// product of one entry per level in O(d) without materializing the matrix.
double gamma_entry(const ParamStack& theta, std::uint64_t c, std::uint64_t c2);

// Edge probability between nodes i and j given their colors.
double psi_entry(const ParamStack& theta, const ColorAssignment& colors,
                 std::uint64_t i, std::uint64_t j);

// Closed-form expected edge counts. Without mu only e_K is populated.
ExpectedEdgeSummary expected_edges(const ParamStack& theta,
                                   const std::optional<MuVector>& mu,
                                   std::uint64_t n);

// --- text formats -----------------------------------------------------------
//
// Theta: one matrix per line, row-major with a semicolon between rows, e.g.
// "0.4,0.7;0.7,0.9". A stack is d lines, or one line replicated d times.
// Mu: comma-separated list of d values, or a single value replicated.

ParamStack parse_theta(std::string_view text, std::uint32_t d, bool replicate);
MuVector parse_mu(std::string_view text, std::uint32_t d);
std::string format_theta(const ParamStack& theta);
std::string format_mu(const MuVector& mu);

// FNV-1a 64-bit hash, used for parameter digests in edge-list headers.
std::uint64_t fnv1a64(std::string_view bytes);

}  // namespace kronmag
