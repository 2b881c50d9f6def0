#include "kronmag/edgelist.hpp"

#include <algorithm>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace kronmag {

EdgeList dedupe(const EdgeList& in) {
    EdgeList out = in;
    std::sort(out.edges.begin(), out.edges.end());
    out.edges.erase(std::unique(out.edges.begin(), out.edges.end()), out.edges.end());
    return out;
}

void write_edge_list(std::ostream& out, const EdgeList& list) {
    out << "# seed=" << list.seed << '\n';
    out << "# mode=" << list.mode << '\n';
    out << "# d=" << list.d << '\n';
    out << "# n=" << list.n << '\n';
    out << "# theta=" << list.theta_digest << '\n';
    out << "# mu=" << (list.mu_digest.empty() ? "-" : list.mu_digest) << '\n';
    for (const auto& [s, t] : list.edges) {
        out << s << '\t' << t << '\n';
    }
}

EdgeList read_edge_list(std::istream& in) {
    EdgeList list;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line.substr(1));
            std::string kv;
            hs >> kv;
            const auto eq = kv.find('=');
            if (eq == std::string::npos) continue;
            const std::string key = kv.substr(0, eq);
            const std::string value = kv.substr(eq + 1);
            if (key == "seed") list.seed = std::stoull(value);
            else if (key == "mode") list.mode = value;
            else if (key == "d") list.d = static_cast<std::uint32_t>(std::stoul(value));
            else if (key == "n") list.n = std::stoull(value);
            else if (key == "theta") list.theta_digest = value;
            else if (key == "mu") list.mu_digest = (value == "-" ? "" : value);
            continue;
        }
        std::istringstream es(line);
        std::uint64_t s = 0, t = 0;
        if (!(es >> s >> t)) {
            throw std::runtime_error("malformed edge line: " + line);
        }
        list.edges.emplace_back(s, t);
    }
    return list;
}

void write_colors(std::ostream& out, const ColorAssignment& colors) {
    for (std::uint64_t i = 0; i < colors.node_count(); ++i) {
        out << i << '\t' << colors.colors[i] << '\n';
    }
}

ColorAssignment read_colors(std::istream& in, std::uint32_t d) {
    ColorAssignment assignment;
    assignment.d = d;
    std::string line;
    std::uint64_t expect = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream cs(line);
        std::uint64_t id = 0, color = 0;
        if (!(cs >> id >> color)) {
            throw std::runtime_error("malformed colors line: " + line);
        }
        if (id != expect) {
            throw std::runtime_error("colors file must list node ids consecutively from 0");
        }
        ++expect;
        assignment.colors.push_back(color);
    }
    assignment.validate();
    return assignment;
}

std::string digest_hex(std::string_view text) {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "fnv:%016llx",
                  static_cast<unsigned long long>(fnv1a64(text)));
    return buf;
}

}  // namespace kronmag
