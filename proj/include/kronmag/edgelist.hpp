#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "kronmag/params.hpp"

namespace kronmag {

// Sampled graph as an ordered list of (source, target) pairs. Multigraph
// output keeps duplicate pairs as repeated entries; simple-graph samplers
// never emit duplicates.
struct EdgeList {
    std::vector<std::pair<std::uint64_t, std::uint64_t>> edges;

    // provenance, written as '#'-prefixed header lines
    std::uint64_t seed = 0;
    std::string mode;
    std::uint32_t d = 0;
    std::uint64_t n = 0;
    std::string theta_digest;
    std::string mu_digest;

    std::size_t size() const { return edges.size(); }
};

// Collapse duplicate pairs and sort lexicographically.
EdgeList dedupe(const EdgeList& in);

// Text format: '# key=value' header lines, then one 'source<TAB>target' line
// per edge, decimal and zero-based.
void write_edge_list(std::ostream& out, const EdgeList& list);
EdgeList read_edge_list(std::istream& in);

// Colors file: one 'node_id<TAB>color' line per node, decimal and zero-based.
void write_colors(std::ostream& out, const ColorAssignment& colors);
ColorAssignment read_colors(std::istream& in, std::uint32_t d);

std::string digest_hex(std::string_view text);

}  // namespace kronmag
