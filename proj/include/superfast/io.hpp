#pragma once

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <superfast/core.hpp>

namespace superfast {

// "%.17g" round-trips every double.
inline std::string format_double(double x, int digits = 17) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    return buf;
}

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == sep) {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> out;
    std::istringstream ss(line);
    std::string tok;
    while (ss >> tok) out.push_back(tok);
    return out;
}

inline bool parse_double(std::string tok, double& out) {
    auto b = tok.find_first_not_of(" \t\"");
    auto e = tok.find_last_not_of(" \t\"\r");
    if (b == std::string::npos) return false;
    tok = tok.substr(b, e - b + 1);
    char* end = nullptr;
    errno = 0;
    out = std::strtod(tok.c_str(), &end);
    return end && *end == '\0' && errno != ERANGE && std::isfinite(out);
}

inline bool parse_index(const std::string& tok, long& out) {
    char* end = nullptr;
    out = std::strtol(tok.c_str(), &end, 10);
    return end && *end == '\0' && !tok.empty();
}

} // namespace detail

// Text format: first line "m n", then m lines of n whitespace-separated reals.
inline Mat read_matrix(std::istream& in) {
    std::string line;
    long lineno = 0;
    auto next_line = [&]() -> bool {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.find_first_not_of(" \t\r") != std::string::npos) return true;
        }
        return false;
    };
    if (!next_line()) throw ParseError("matrix: missing header", lineno);
    auto head = detail::split_ws(line);
    long m = 0, n = 0;
    if (head.size() != 2 || !detail::parse_index(head[0], m) || !detail::parse_index(head[1], n) || m < 0 || n < 0)
        throw ParseError("matrix: header must be two non-negative integers", lineno);
    Mat M(m, n);
    for (long i = 0; i < m; ++i) {
        if (!next_line()) throw ParseError("matrix: expected " + std::to_string(m) + " rows", lineno);
        auto toks = detail::split_ws(line);
        if (static_cast<long>(toks.size()) != n)
            throw ParseError("matrix: expected " + std::to_string(n) + " entries", lineno);
        for (long j = 0; j < n; ++j) {
            double v;
            if (!detail::parse_double(toks[j], v)) throw ParseError("matrix: bad number '" + toks[j] + "'", lineno);
            M(i, j) = v;
        }
    }
    return M;
}

inline void write_matrix(std::ostream& out, const Mat& M) {
    out << M.rows() << ' ' << M.cols() << '\n';
    for (Index i = 0; i < M.rows(); ++i) {
        for (Index j = 0; j < M.cols(); ++j) {
            if (j) out << ' ';
            out << format_double(M(i, j));
        }
        out << '\n';
    }
}

inline Mat read_matrix_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    return read_matrix(f);
}

inline void write_matrix_file(const std::string& path, const Mat& M) {
    std::ofstream f(path);
    if (!f) throw IoError("cannot write " + path);
    write_matrix(f, M);
}

} // namespace superfast
