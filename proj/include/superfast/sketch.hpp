#pragma once

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/random.hpp>

namespace superfast {

enum class SketchKind { gaussian, perm_rows, block_perm, asph };

inline std::string to_string(SketchKind k) {
    switch (k) {
    case SketchKind::gaussian: return "gaussian";
    case SketchKind::perm_rows: return "perm";
    case SketchKind::block_perm: return "blockperm";
    case SketchKind::asph: return "asph";
    }
    return "?";
}

inline SketchKind parse_sketch_kind(const std::string& name) {
    if (name == "gaussian") return SketchKind::gaussian;
    if (name == "perm") return SketchKind::perm_rows;
    if (name == "blockperm") return SketchKind::block_perm;
    if (name == "asph") return SketchKind::asph;
    throw InputError("unknown multiplier '" + name + "'");
}

struct SketchOptions {
    bool permute_columns = true;  // asph only
};

// s x m multiplier F, stored implicitly. apply_sketch returns scale * F * M.
struct SketchOp {
    SketchKind kind = SketchKind::perm_rows;
    Index s = 0, m = 0;
    double scale = 1.0;
    std::vector<Index> rows;          // perm_rows: picked input rows; asph: picked rows of H D Pi
    std::vector<Index> col_perm;      // block_perm, asph
    std::vector<signed char> signs;   // asph
    int depth = 0;                    // asph
    Index blocks = 0;                 // block_perm
    Mat dense;                        // gaussian
};

struct ApplyStats {
    long long additions = 0;   // per column
    long long sign_flips = 0;  // per column
};

inline bool is_power_of_two(Index m) { return m > 0 && std::has_single_bit(static_cast<std::uint64_t>(m)); }

// param: block count c for block_perm (0 means m / s), depth d for asph; ignored otherwise.
inline SketchOp build_sketch(SketchKind kind, Index s, Index m, Index param, Rng& rng, SketchOptions opts = {}) {
    if (s < 1 || m < 1 || s > m) throw InputError("build_sketch: need 1 <= s <= m");
    SketchOp F;
    F.kind = kind;
    F.s = s;
    F.m = m;
    switch (kind) {
    case SketchKind::gaussian:
        F.dense = gaussian(s, m, rng);
        F.scale = 1.0 / std::sqrt(double(s));
        break;
    case SketchKind::perm_rows: {
        auto p = random_permutation(m, rng);
        F.rows.assign(p.begin(), p.begin() + s);
        break;
    }
    case SketchKind::block_perm: {
        Index c = param;
        if (c == 0) {
            if (m % s) throw InputError("build_sketch: block_perm needs s to divide m");
            c = m / s;
        }
        if (c < 1 || c * s > m) throw InputError("build_sketch: block_perm needs 1 <= c and c * s <= m");
        F.blocks = c;
        F.col_perm = random_permutation(m, rng);
        F.scale = 1.0 / std::sqrt(double(c));
        break;
    }
    case SketchKind::asph: {
        if (!is_power_of_two(m)) throw InputError("build_sketch: asph needs m to be a power of two");
        const int t = std::countr_zero(static_cast<std::uint64_t>(m));
        if (param < 0 || param > t) throw InputError("build_sketch: asph depth outside [0, log2 m]");
        F.depth = int(param);
        if (opts.permute_columns) {
            F.col_perm = random_permutation(m, rng);
        } else {
            F.col_perm.resize(m);
            for (Index i = 0; i < m; ++i) F.col_perm[i] = i;
        }
        F.signs.resize(m);
        for (auto& sg : F.signs) sg = (rng.next_u32() & 1u) ? 1 : -1;
        F.rows = sample_without_replacement(m, s, rng);
        F.scale = std::pow(2.0, -0.5 * F.depth);
        break;
    }
    }
    return F;
}

namespace detail {

// In place: Y <- (H_{2^d} kron I_{m/2^d}) Y, as d butterfly levels.
inline void hadamard_levels(Mat& Y, int d) {
    const Index m = Y.rows();
    for (int level = 1; level <= d; ++level) {
        const Index half = m >> level;
        for (Index start = 0; start < m; start += 2 * half) {
            auto top = Y.middleRows(start, half);
            auto bot = Y.middleRows(start + half, half);
            Mat diff = top - bot;
            top += bot;
            bot = diff;
        }
    }
}

} // namespace detail

inline Mat apply_sketch(const SketchOp& F, const Mat& M, ApplyStats* stats = nullptr) {
    if (M.rows() != F.m)
        throw InputError("apply_sketch: operator has " + std::to_string(F.m) + " columns, matrix has " +
                         std::to_string(M.rows()) + " rows");
    const Index n = M.cols();
    Mat out(F.s, n);
    switch (F.kind) {
    case SketchKind::gaussian:
        out.noalias() = F.scale * (F.dense * M);
        break;
    case SketchKind::perm_rows:
        for (Index i = 0; i < F.s; ++i) out.row(i) = M.row(F.rows[i]);
        break;
    case SketchKind::block_perm:
        out.setZero();
        for (Index b = 0; b < F.blocks; ++b)
            for (Index i = 0; i < F.s; ++i) out.row(i) += M.row(F.col_perm[b * F.s + i]);
        out *= F.scale;
        if (stats) stats->additions = (F.blocks - 1) * F.s;
        break;
    case SketchKind::asph: {
        Mat Y(F.m, n);
        for (Index i = 0; i < F.m; ++i) Y.row(i) = double(F.signs[i]) * M.row(F.col_perm[i]);
        detail::hadamard_levels(Y, F.depth);
        for (Index t = 0; t < F.s; ++t) out.row(t) = F.scale * Y.row(F.rows[t]);
        if (stats) {
            stats->additions = (long long)F.depth * F.m;
            stats->sign_flips = F.m;
        }
        break;
    }
    }
    return out;
}

inline constexpr Index kDensifyLimit = Index(1) << 24;

// Explicit s x m matrix including the scale. Built entrywise, independently of apply_sketch.
inline Mat densify(const SketchOp& F) {
    if (F.s * F.m > kDensifyLimit) throw InputError("densify: operator too large to materialize");
    Mat D = Mat::Zero(F.s, F.m);
    switch (F.kind) {
    case SketchKind::gaussian:
        D = F.scale * F.dense;
        break;
    case SketchKind::perm_rows:
        for (Index i = 0; i < F.s; ++i) D(i, F.rows[i]) = 1.0;
        break;
    case SketchKind::block_perm:
        for (Index b = 0; b < F.blocks; ++b)
            for (Index i = 0; i < F.s; ++i) D(i, F.col_perm[b * F.s + i]) = F.scale;
        break;
    case SketchKind::asph: {
        // H_{d,d} = H_{2^d} kron I_b with Sylvester sign (-1)^{popcount(p & p')}.
        const Index b = F.m >> F.depth;
        for (Index t = 0; t < F.s; ++t) {
            const Index i = F.rows[t];
            const Index p = i / b, q = i % b;
            for (Index pp = 0; pp < (Index(1) << F.depth); ++pp) {
                const Index j = pp * b + q;
                const double h = (std::popcount(static_cast<std::uint64_t>(p & pp)) & 1) ? -1.0 : 1.0;
                D(t, F.col_perm[j]) = F.scale * h * F.signs[j];
            }
        }
        break;
    }
    }
    return D;
}

} // namespace superfast
