#pragma once

#include <algorithm>
#include <numeric>
#include <ostream>
#include <string>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/io.hpp>
#include <superfast/random.hpp>

namespace superfast {

enum class Side { row, column };

struct LeverageScores {
    Side side = Side::column;
    Index r = 0;
    Vec gamma;  // squared row norms of an orthonormal basis; sums to r
};

struct ScorePair {
    LeverageScores row;
    LeverageScores col;
};

inline constexpr double kScoreGapTol = 1e-8;

inline LeverageScores scores_from_orthogonal(const Mat& V, Side side, double ortho_tol = 1e-8) {
    if (orthonormality_defect(V) > ortho_tol)
        throw InputError("scores_from_orthogonal: columns are not orthonormal");
    return {side, V.cols(), V.rowwise().squaredNorm()};
}

inline void require_score_gap(const Vec& sigma, Index r, std::string_view who) {
    if (r < 1 || r > sigma.size()) throw InputError(std::string(who) + ": rank outside [1, min(m, n)]");
    if (!(sigma(r - 1) > 0)) throw RankDeficiencyError(std::string(who) + ": sigma_r is zero");
    if (r < sigma.size() && !(sigma(r - 1) > sigma(r) * (1.0 + kScoreGapTol)))
        throw IllPosedScoresError(std::string(who) + ": no gap between sigma_r and sigma_{r+1}");
}

// Dense route: r-top singular vectors of M.
inline ScorePair scores_of_matrix(const Mat& M, Index r) {
    SvdFactors f = svd(M);
    require_score_gap(f.sigma, r, "scores_of_matrix");
    return {{Side::row, r, f.U.leftCols(r).rowwise().squaredNorm()},
            {Side::column, r, f.V.leftCols(r).rowwise().squaredNorm()}};
}

// Scores of the product A B from its factors: QR of A and B^T, then an SVD of the small core.
inline ScorePair scores_of_lra(const Mat& A, const Mat& B, Index r = -1) {
    if (A.cols() != B.rows()) throw InputError("scores_of_lra: inner dimensions differ");
    const Index q = A.cols();
    if (r < 0) r = q;
    if (r < 1 || r > q || A.rows() < q || B.cols() < q)
        throw InputError("scores_of_lra: need 1 <= r <= inner dimension <= min(m, n)");
    ThinQr qa = thin_qr(A);
    ThinQr qb = thin_qr(B.transpose());
    SvdFactors core = svd(qa.R * qb.R.transpose());
    if (!(core.sigma(r - 1) > 1e-12 * core.sigma(0)))
        throw RankDeficiencyError("scores_of_lra: factors are rank deficient");
    require_score_gap(core.sigma, r, "scores_of_lra");
    return {{Side::row, r, (qa.Q * core.U.leftCols(r)).rowwise().squaredNorm()},
            {Side::column, r, (qb.Q * core.V.leftCols(r)).rowwise().squaredNorm()}};
}

// Row scores of the top-r left singular space of a tall X, without a gap check.
inline Vec top_row_scores(const Mat& X, Index r) {
    if (r < 1 || r > X.cols() || X.rows() < X.cols()) throw InputError("top_row_scores: bad rank or shape");
    ThinQr qr = thin_qr(X);
    SvdFactors core = svd(qr.R);
    return (qr.Q * core.U.leftCols(r)).rowwise().squaredNorm();
}

struct SampleDist {
    Vec p;
    double beta = 1.0;
    Index r = 0;
};

// p_j = beta gamma_j / r + (1 - beta) / n.
inline SampleDist make_dist(const LeverageScores& s, double beta = 1.0) {
    if (!(beta > 0 && beta <= 1)) throw InputError("make_dist: beta must be in (0, 1]");
    if (s.r < 1 || s.gamma.size() < 1) throw InputError("make_dist: empty scores");
    const double n = double(s.gamma.size());
    Vec p = (beta / double(s.r)) * s.gamma.array() + (1.0 - beta) / n;
    return {p, beta, s.r};
}

// Uniform p with the largest beta it certifies against the given scores.
inline SampleDist uniform_dist(Index n, const LeverageScores& s) {
    if (n < 1) throw InputError("uniform_dist: n must be positive");
    if (s.gamma.size() != n) throw InputError("uniform_dist: score length differs from n");
    double beta = 1.0;
    for (Index j = 0; j < n; ++j)
        if (s.gamma(j) > 0) beta = std::min(beta, double(s.r) / (double(n) * s.gamma(j)));
    return {Vec::Constant(n, 1.0 / double(n)), beta, s.r};
}

inline SampleDist uniform_dist(Index n) { return {Vec::Constant(n, 1.0 / double(n)), 1.0, 0}; }

inline double certificate(const SampleDist& d, const LeverageScores& s) {
    double beta = std::numeric_limits<double>::infinity();
    for (Index j = 0; j < s.gamma.size(); ++j)
        if (s.gamma(j) > 0) beta = std::min(beta, d.p(j) * double(s.r) / s.gamma(j));
    return beta;
}

enum class SamplingMode { exact, expected };

inline std::string to_string(SamplingMode m) { return m == SamplingMode::exact ? "exact" : "expected"; }

// The (S, D) pair: picked indices and their re-scaling factors.
struct SamplingPlan {
    SamplingMode mode = SamplingMode::exact;
    Index l = 0;
    Index domain = 0;
    std::vector<Index> picks;
    std::vector<double> scales;

    Index size() const { return Index(picks.size()); }
};

inline SamplingPlan sample_exact(const SampleDist& d, Index l, Rng& rng) {
    if (l < 1) throw InputError("sample_exact: l must be positive");
    const Index n = d.p.size();
    if (n < 1) throw InputError("sample_exact: empty distribution");
    std::vector<double> cdf(n);
    std::partial_sum(d.p.data(), d.p.data() + n, cdf.begin());
    const double total = cdf.back();
    SamplingPlan plan{SamplingMode::exact, l, n, {}, {}};
    plan.picks.reserve(l);
    plan.scales.reserve(l);
    for (Index t = 0; t < l; ++t) {
        const double u = rng.uniform() * total;
        Index j = Index(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        j = std::min(j, n - 1);
        plan.picks.push_back(j);
        plan.scales.push_back(1.0 / std::sqrt(double(l) * d.p(j)));
    }
    return plan;
}

// One Bernoulli pass: j kept with probability min(1, l p_j).
inline SamplingPlan sample_expected(const SampleDist& d, Index l, Rng& rng) {
    if (l < 1) throw InputError("sample_expected: l must be positive");
    const Index n = d.p.size();
    for (int attempt = 0; attempt < 2; ++attempt) {
        SamplingPlan plan{SamplingMode::expected, l, n, {}, {}};
        for (Index j = 0; j < n; ++j) {
            const double q = double(l) * d.p(j);
            if (rng.uniform() < std::min(1.0, q)) {
                plan.picks.push_back(j);
                plan.scales.push_back(1.0 / std::min(1.0, std::sqrt(q)));
            }
        }
        if (!plan.picks.empty()) return plan;
    }
    throw DegenerateSampleError("sample_expected: empty plan twice in a row");
}

inline SamplingPlan sample(const SampleDist& d, Index l, SamplingMode mode, Rng& rng) {
    return mode == SamplingMode::exact ? sample_exact(d, l, rng) : sample_expected(d, l, rng);
}

enum class Axis { rows, cols };

// rows: t-th row is scales_t * M[pick_t, :] (D^T S^T M); cols: M S D.
inline Mat apply_plan(const Mat& M, const SamplingPlan& plan, Axis axis) {
    const Index dim = axis == Axis::rows ? M.rows() : M.cols();
    for (Index j : plan.picks)
        if (j < 0 || j >= dim) throw InputError("apply_plan: index out of range");
    const Index k = plan.size();
    if (axis == Axis::rows) {
        Mat out(k, M.cols());
        for (Index t = 0; t < k; ++t) out.row(t) = plan.scales[t] * M.row(plan.picks[t]);
        return out;
    }
    Mat out(M.rows(), k);
    for (Index t = 0; t < k; ++t) out.col(t) = plan.scales[t] * M.col(plan.picks[t]);
    return out;
}

inline Vec plan_scales(const SamplingPlan& plan) {
    return Eigen::Map<const Vec>(plan.scales.data(), Index(plan.scales.size()));
}

inline void write_plan_csv(std::ostream& out, const SamplingPlan& plan) {
    out << "mode,l,pick,scale\n";
    for (Index t = 0; t < plan.size(); ++t)
        out << to_string(plan.mode) << ',' << plan.l << ',' << plan.picks[t] << ','
            << format_double(plan.scales[t]) << '\n';
}

} // namespace superfast
