#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <superfast/core.hpp>

namespace superfast {

// Philox4x32-10 block function (Salmon et al., Random123).
inline std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr,
                                                  std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
    constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = std::uint64_t(M0) * ctr[0];
        const std::uint64_t p1 = std::uint64_t(M1) * ctr[2];
        const auto hi0 = std::uint32_t(p0 >> 32), lo0 = std::uint32_t(p0);
        const auto hi1 = std::uint32_t(p1 >> 32), lo1 = std::uint32_t(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += W0;
        key[1] += W1;
    }
    return ctr;
}

// Counter-based generator. Key = seed, counter = (block index, stream).
// Two generators with equal (seed, stream) produce identical sequences.
class Rng {
public:
    static constexpr std::string_view algorithm = "philox4x32-10";

    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0) : seed_(seed), stream_(stream) {}

    std::uint64_t seed() const { return seed_; }
    std::uint64_t stream() const { return stream_; }
    std::uint64_t counter() const { return block_; }

    // Independent generator for the same seed.
    Rng derive(std::uint64_t stream) const { return Rng(seed_, stream); }

    std::uint32_t next_u32() {
        if (pos_ == 4) refill();
        return buf_[pos_++];
    }

    std::uint64_t next_u64() {
        const std::uint64_t hi = next_u32();
        return (hi << 32) | next_u32();
    }

    // 53-bit uniform in [0, 1).
    double uniform() { return double(next_u64() >> 11) * 0x1.0p-53; }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double rad = std::sqrt(-2.0 * std::log(u1));
        const double ang = 2.0 * std::numbers::pi * u2;
        spare_ = rad * std::sin(ang);
        have_spare_ = true;
        return rad * std::cos(ang);
    }

    // Unbiased integer in [0, n), Lemire's multiply-and-reject.
    std::uint64_t uniform_index(std::uint64_t n) {
        if (n == 0) throw InputError("uniform_index: empty range");
        if (n <= 0xFFFFFFFFull) {
            const auto bound = std::uint32_t(n);
            std::uint64_t prod = std::uint64_t(next_u32()) * bound;
            auto low = std::uint32_t(prod);
            if (low < bound) {
                const std::uint32_t thresh = std::uint32_t(-bound) % bound;
                while (low < thresh) {
                    prod = std::uint64_t(next_u32()) * bound;
                    low = std::uint32_t(prod);
                }
            }
            return prod >> 32;
        }
        const std::uint64_t limit = ~std::uint64_t(0) - (~std::uint64_t(0) % n);
        std::uint64_t x;
        do x = next_u64();
        while (x >= limit);
        return x % n;
    }

private:
    void refill() {
        buf_ = philox4x32_10({std::uint32_t(block_), std::uint32_t(block_ >> 32), std::uint32_t(stream_),
                              std::uint32_t(stream_ >> 32)},
                             {std::uint32_t(seed_), std::uint32_t(seed_ >> 32)});
        ++block_;
        pos_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buf_{};
    int pos_ = 4;
    double spare_ = 0.0;
    bool have_spare_ = false;
};

// Stable stream ids from labels, so experiments do not depend on call order.
inline std::uint64_t stream_id(std::string_view label) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (unsigned char c : label) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

inline std::uint64_t stream_id(std::uint64_t base, std::uint64_t k) {
    std::uint64_t z = base ^ (k + 0x9e3779b97f4a7c15ull + (base << 6) + (base >> 2));
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline void shuffle(std::vector<Index>& v, Rng& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        const auto j = rng.uniform_index(i);
        std::swap(v[i - 1], v[j]);
    }
}

inline std::vector<Index> random_permutation(Index n, Rng& rng) {
    std::vector<Index> p(n);
    for (Index i = 0; i < n; ++i) p[i] = i;
    shuffle(p, rng);
    return p;
}

// k distinct indices from [0, n), in draw order.
inline std::vector<Index> sample_without_replacement(Index n, Index k, Rng& rng) {
    if (k < 0 || k > n) throw InputError("sample_without_replacement: k outside [0, n]");
    std::vector<Index> p(n);
    for (Index i = 0; i < n; ++i) p[i] = i;
    for (Index i = 0; i < k; ++i) {
        const auto j = i + Index(rng.uniform_index(std::uint64_t(n - i)));
        std::swap(p[i], p[j]);
    }
    p.resize(k);
    return p;
}

inline Mat gaussian(Index m, Index n, Rng& rng) {
    if (m < 1 || n < 1) throw InputError("gaussian: dimensions must be positive");
    Mat G(m, n);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < n; ++j) G(i, j) = rng.normal();
    return G;
}

enum class FactorKind { left, right, two_sided };

struct FactorGaussianSpec {
    FactorKind kind = FactorKind::two_sided;
    Index m = 0, n = 0, rho = 0;
    Vec sigma;  // two_sided only; empty means all ones
    Mat fixed;  // left: rho x n factor B; right: m x rho factor A
};

struct FactorGaussian {
    Mat M;
    Mat left;   // m x rho
    Mat right;  // rho x n, M = left * right
    std::optional<double> fixed_cond;
};

inline constexpr double kMaxFixedFactorCond = 100.0;

inline double condition_number(const Mat& M) {
    Vec s = singular_values(M);
    if (s.size() == 0) return 1.0;
    const double lo = s(s.size() - 1);
    return lo > 0 ? s(0) / lo : std::numeric_limits<double>::infinity();
}

namespace detail {
inline bool full_column_rank(const Mat& X) {
    Vec s = singular_values(X);
    return s.size() && s(s.size() - 1) > 1e-12 * s(0);
}
} // namespace detail

inline FactorGaussian factor_gaussian(const FactorGaussianSpec& spec, Rng& rng) {
    const Index m = spec.m, n = spec.n, rho = spec.rho;
    if (m < 1 || n < 1 || rho < 1 || rho > std::min(m, n))
        throw InputError("factor_gaussian: need 1 <= rho <= min(m, n)");
    FactorGaussian out;
    Vec sigma = Vec::Ones(rho);
    if (spec.kind == FactorKind::two_sided && spec.sigma.size()) {
        if (spec.sigma.size() != rho) throw InputError("factor_gaussian: sigma must have length rho");
        for (Index j = 0; j < rho; ++j)
            if (!(spec.sigma(j) > 0) || (j && spec.sigma(j) > spec.sigma(j - 1)))
                throw InputError("factor_gaussian: sigma must be positive and non-increasing");
        sigma = spec.sigma;
    }
    if (spec.kind == FactorKind::left || spec.kind == FactorKind::right) {
        const Index fr = spec.kind == FactorKind::left ? rho : m;
        const Index fc = spec.kind == FactorKind::left ? n : rho;
        if (spec.fixed.rows() != fr || spec.fixed.cols() != fc)
            throw InputError("factor_gaussian: fixed factor has wrong shape");
        require_finite(spec.fixed, "factor_gaussian");
        out.fixed_cond = condition_number(spec.fixed);
        if (!(*out.fixed_cond <= kMaxFixedFactorCond))
            throw InputError("factor_gaussian: fixed factor condition number exceeds 100");
    }
    for (int attempt = 0; attempt < 2; ++attempt) {
        switch (spec.kind) {
        case FactorKind::left:
            out.left = gaussian(m, rho, rng);
            out.right = spec.fixed;
            break;
        case FactorKind::right:
            out.left = spec.fixed;
            out.right = gaussian(rho, n, rng);
            break;
        case FactorKind::two_sided:
            out.left = gaussian(m, rho, rng) * sigma.asDiagonal();
            out.right = gaussian(rho, n, rng);
            break;
        }
        if (detail::full_column_rank(out.left) && detail::full_column_rank(out.right.transpose())) {
            out.M = out.left * out.right;
            return out;
        }
    }
    throw DegenerateSampleError("factor_gaussian: rank-deficient draw twice in a row");
}

// M + rel * ||M|| * G / ||G||, so that ||E||_2 = rel * ||M||_2.
inline Mat perturb(const Mat& M, double rel, Rng& rng, std::optional<double> norm_M = std::nullopt) {
    if (!(rel >= 0)) throw InputError("perturb: rel must be non-negative");
    require_finite(M, "perturb");
    if (rel == 0) return M;
    Mat G = gaussian(M.rows(), M.cols(), rng);
    const double nM = norm_M ? *norm_M : spectral_norm(M);
    return M + (rel * nM / spectral_norm(G)) * G;
}

struct NormBounds {
    Index m = 0, n = 0;
    double expected_norm = 0.0;                // E||G_{m,n}|| <= sqrt(m) + sqrt(n)
    std::optional<double> expected_pinv_norm;  // E||G^+|| <= e sqrt(m) / (m - n), m >= n + 2 >= 4
};

inline NormBounds norm_bounds(Index m, Index n) {
    if (m < 1 || n < 1) throw InputError("norm_bounds: dimensions must be positive");
    NormBounds b{m, n, std::sqrt(double(m)) + std::sqrt(double(n)), std::nullopt};
    if (m >= n + 2 && n + 2 >= 4) b.expected_pinv_norm = std::numbers::e * std::sqrt(double(m)) / double(m - n);
    return b;
}

// Tail of ||G_{m,n}^+||, m >= n: exceeded with probability at most t^{n-m}.
inline double pinv_norm_tail(Index m, Index n, double t) {
    if (m < n) throw InputError("pinv_norm_tail: needs m >= n");
    return t * std::numbers::e * std::sqrt(double(m)) / double(m - n + 1);
}

} // namespace superfast
