#include "kronmag/params.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>
#include <stdexcept>

namespace kronmag {

namespace {

[[noreturn]] void arg_error(const std::string& msg) { throw std::invalid_argument(msg); }

void check_weight(double w, const char* what) {
    if (!std::isfinite(w) || w < 0.0) {
        arg_error(std::string(what) + " must be a finite non-negative value");
    }
}

}  // namespace

void InitiatorMatrix::validate() const {
    check_weight(theta00, "theta entry (0,0)");
    check_weight(theta01, "theta entry (0,1)");
    check_weight(theta10, "theta entry (1,0)");
    check_weight(theta11, "theta entry (1,1)");
}

bool ParamStack::bernoulli_valid() const {
    for (const auto& m : levels) {
        if (!m.bernoulli_valid()) return false;
    }
    return true;
}

void ParamStack::validate() const {
    if (levels.empty()) arg_error("parameter stack must have at least one level");
    if (levels.size() > 62) arg_error("parameter stack depth must be <= 62");
    for (const auto& m : levels) m.validate();
}

void MuVector::validate() const {
    if (values.empty()) arg_error("mu vector must have at least one level");
    if (values.size() > 62) arg_error("mu vector depth must be <= 62");
    for (double v : values) {
        if (!std::isfinite(v) || v < 0.0 || v > 1.0) {
            arg_error("mu values must lie in [0, 1]");
        }
    }
}

void ColorAssignment::validate() const {
    if (d < 1 || d > 62) arg_error("color assignment depth must be in [1, 62]");
    const std::uint64_t limit = std::uint64_t{1} << d;
    for (std::uint64_t c : colors) {
        if (c >= limit) arg_error("color out of range for the given depth");
    }
}

void ModelConfig::validate() const {
    theta.validate();
    if (d != theta.depth()) arg_error("config depth does not match theta stack depth");
    if (n < 1) arg_error("node count must be >= 1");
    if (mu) {
        mu->validate();
        if (mu->depth() != d) arg_error("mu depth does not match theta stack depth");
    }
}

int bit_of(std::uint64_t index, std::uint32_t k, std::uint32_t d) {
    if (d < 1 || d > 62) arg_error("bit_of: depth must be in [1, 62]");
    if (k < 1 || k > d) arg_error("bit_of: level k must be in [1, d]");
    if (index >= (std::uint64_t{1} << d)) arg_error("bit_of: index out of range");
    return static_cast<int>((index >> (d - k)) & 1u);
}

double gamma_entry(const ParamStack& theta, std::uint64_t c, std::uint64_t c2) {
    const std::uint32_t d = theta.depth();
    if (d == 0) arg_error("gamma_entry: empty stack");
    const std::uint64_t limit = std::uint64_t{1} << d;
    if (c >= limit || c2 >= limit) arg_error("gamma_entry: color out of range");
    double prod = 1.0;
    for (std::uint32_t k = 0; k < d; ++k) {
        const int a = static_cast<int>((c >> (d - 1 - k)) & 1u);
        const int b = static_cast<int>((c2 >> (d - 1 - k)) & 1u);
        prod *= theta.levels[k].at(a, b);
    }
    return prod;
}

double psi_entry(const ParamStack& theta, const ColorAssignment& colors,
                 std::uint64_t i, std::uint64_t j) {
    if (i >= colors.node_count() || j >= colors.node_count()) {
        arg_error("psi_entry: node index out of range");
    }
    return gamma_entry(theta, colors.colors[i], colors.colors[j]);
}

ExpectedEdgeSummary expected_edges(const ParamStack& theta,
                                   const std::optional<MuVector>& mu,
                                   std::uint64_t n) {
    theta.validate();
    ExpectedEdgeSummary out;
    double ek = 1.0;
    for (const auto& m : theta.levels) ek *= m.total();
    out.e_k = ek;
    if (!mu) return out;

    mu->validate();
    if (mu->depth() != theta.depth()) {
        arg_error("expected_edges: mu depth does not match theta stack depth");
    }
    const double nn = static_cast<double>(n);
    double em = 1.0, emk = 1.0, ekm = 1.0;
    for (std::uint32_t k = 0; k < theta.depth(); ++k) {
        const auto& t = theta.levels[k];
        const double u = mu->values[k];
        const double v = 1.0 - u;
        em *= v * v * t.theta00 + v * u * t.theta01 + u * v * t.theta10 + u * u * t.theta11;
        emk *= v * (t.theta00 + t.theta01) + u * (t.theta10 + t.theta11);
        ekm *= v * (t.theta00 + t.theta10) + u * (t.theta01 + t.theta11);
    }
    out.e_m = nn * nn * em;
    out.e_mk = nn * emk;
    out.e_km = nn * ekm;
    return out;
}

// --- text formats -----------------------------------------------------------

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
    std::vector<std::string> parts;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t end = text.find(sep, start);
        if (end == std::string_view::npos) end = text.size();
        parts.emplace_back(text.substr(start, end - start));
        start = end + 1;
        if (start == text.size() + 1) break;
    }
    return parts;
}

double parse_number(const std::string& token, const char* what) {
    std::size_t pos = 0;
    double value = 0.0;
    try {
        value = std::stod(token, &pos);
    } catch (const std::exception&) {
        arg_error(std::string("cannot parse ") + what + " value '" + token + "'");
    }
    while (pos < token.size() && std::isspace(static_cast<unsigned char>(token[pos]))) ++pos;
    if (pos != token.size()) {
        arg_error(std::string("trailing junk in ") + what + " value '" + token + "'");
    }
    return value;
}

InitiatorMatrix parse_matrix_line(const std::string& line) {
    const auto rows = split(line, ';');
    if (rows.size() != 2) arg_error("theta matrix line must have two ';'-separated rows: " + line);
    const auto r0 = split(rows[0], ',');
    const auto r1 = split(rows[1], ',');
    if (r0.size() != 2 || r1.size() != 2) {
        arg_error("theta matrix row must have two ','-separated entries: " + line);
    }
    InitiatorMatrix m;
    m.theta00 = parse_number(r0[0], "theta");
    m.theta01 = parse_number(r0[1], "theta");
    m.theta10 = parse_number(r1[0], "theta");
    m.theta11 = parse_number(r1[1], "theta");
    m.validate();
    return m;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string fmt_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

}  // namespace

ParamStack parse_theta(std::string_view text, std::uint32_t d, bool replicate) {
    if (d < 1 || d > 62) arg_error("theta depth must be in [1, 62]");
    std::vector<std::string> lines;
    for (auto& raw : split(text, '\n')) {
        const std::string t = trim(raw);
        if (!t.empty()) lines.push_back(t);
    }
    if (lines.empty()) arg_error("theta specification is empty");

    ParamStack stack;
    if (replicate) {
        if (lines.size() != 1) {
            arg_error("--replicate expects a single theta matrix line");
        }
        stack.levels.assign(d, parse_matrix_line(lines[0]));
    } else {
        if (lines.size() != d) {
            arg_error("theta stack must have exactly d matrix lines (or use --replicate)");
        }
        for (const auto& line : lines) stack.levels.push_back(parse_matrix_line(line));
    }
    stack.validate();
    return stack;
}

MuVector parse_mu(std::string_view text, std::uint32_t d) {
    if (d < 1 || d > 62) arg_error("mu depth must be in [1, 62]");
    std::vector<double> vals;
    for (auto& tok : split(text, ',')) {
        const std::string t = trim(tok);
        if (t.empty()) arg_error("empty mu entry");
        vals.push_back(parse_number(t, "mu"));
    }
    MuVector mu;
    if (vals.size() == 1) {
        mu.values.assign(d, vals[0]);
    } else if (vals.size() == d) {
        mu.values = std::move(vals);
    } else {
        arg_error("mu must be a single value or exactly d comma-separated values");
    }
    mu.validate();
    return mu;
}

std::string format_theta(const ParamStack& theta) {
    std::ostringstream out;
    for (std::size_t k = 0; k < theta.levels.size(); ++k) {
        const auto& m = theta.levels[k];
        if (k) out << '\n';
        out << fmt_double(m.theta00) << ',' << fmt_double(m.theta01) << ';'
            << fmt_double(m.theta10) << ',' << fmt_double(m.theta11);
    }
    return out.str();
}

std::string format_mu(const MuVector& mu) {
    std::ostringstream out;
    for (std::size_t k = 0; k < mu.values.size(); ++k) {
        if (k) out << ',';
        out << fmt_double(mu.values[k]);
    }
    return out.str();
}

std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 0x100000001b3ull;
    }
    return h;
}

}  // namespace kronmag
