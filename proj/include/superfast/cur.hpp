#pragma once

#include <concepts>
#include <optional>
#include <string>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/random.hpp>
#include <superfast/sampling.hpp>

namespace superfast {

// Entry access to an m x n input; CUR only ever asks for these three shapes.
template <class S>
concept MatrixSource = requires(const S& s, const std::vector<Index>& idx) {
    { s.rows() } -> std::convertible_to<Index>;
    { s.cols() } -> std::convertible_to<Index>;
    { s.columns(idx) } -> std::convertible_to<Mat>;
    { s.row_block(idx) } -> std::convertible_to<Mat>;
    { s.full() } -> std::convertible_to<Mat>;
};

class DenseSource {
public:
    explicit DenseSource(const Mat& M) : M_(M) {}
    Index rows() const { return M_.rows(); }
    Index cols() const { return M_.cols(); }
    Mat columns(const std::vector<Index>& J) const { return M_(Eigen::all, J); }
    Mat row_block(const std::vector<Index>& I) const { return M_(I, Eigen::all); }
    Mat full() const { return M_; }

private:
    const Mat& M_;
};

// Records every distinct entry handed out.
class CountingSource {
public:
    explicit CountingSource(const Mat& M) : M_(M), seen_(std::size_t(M.size()), false) {}
    Index rows() const { return M_.rows(); }
    Index cols() const { return M_.cols(); }

    Mat columns(const std::vector<Index>& J) const {
        for (Index j : J)
            for (Index i = 0; i < M_.rows(); ++i) mark(i, j);
        return M_(Eigen::all, J);
    }
    Mat row_block(const std::vector<Index>& I) const {
        for (Index i : I)
            for (Index j = 0; j < M_.cols(); ++j) mark(i, j);
        return M_(I, Eigen::all);
    }
    Mat full() const {
        for (Index i = 0; i < M_.rows(); ++i)
            for (Index j = 0; j < M_.cols(); ++j) mark(i, j);
        return M_;
    }

    Index distinct_reads() const { return distinct_; }
    bool was_read(Index i, Index j) const { return seen_[std::size_t(j * M_.rows() + i)]; }

private:
    void mark(Index i, Index j) const {
        auto ref = seen_[std::size_t(j * M_.rows() + i)];
        if (!ref) {
            ref = true;
            ++distinct_;
        }
    }

    const Mat& M_;
    mutable std::vector<bool> seen_;
    mutable Index distinct_ = 0;
};

enum class ScoreSource { svd, uniform, supplied };

inline std::string to_string(ScoreSource s) {
    switch (s) {
    case ScoreSource::svd: return "svd";
    case ScoreSource::uniform: return "uniform";
    case ScoreSource::supplied: return "supplied";
    }
    return "?";
}

struct CurOptions {
    Index r = 0, k = 0, l = 0;  // rank, sampled rows, sampled columns
    double beta = 1.0, beta_bar = 1.0;
    SamplingMode mode = SamplingMode::exact;
    ScoreSource source = ScoreSource::uniform;
    std::optional<ScorePair> supplied;  // supplied mode; with svd mode, precomputed SVD scores of M
    double nucleus_rtol = -1.0;          // sigma_r(W) / sigma_1(W) below this is degenerate; < 0: default_pinv_tol
};

// M ~ C U R with C = M[:, J], R = M[I, :] unscaled, U = D pinv_r(W) Dbar,
// W = Dbar M[I, J] D. U is kept as core_left * core_right.
struct CurFactors {
    Index r = 0;
    ScoreSource score_source = ScoreSource::uniform;
    std::vector<Index> col_idx, row_idx;
    Vec col_scales, row_scales;
    Mat C, R;
    Mat core_left;   // l x r: D Vbar Sigma^{-1}
    Mat core_right;  // r x k: Ubar^T Dbar

    Mat U() const { return core_left * core_right; }
    Mat reconstruct() const { return (C * core_left) * (core_right * R); }
    // Rank-r factors with A B = C U R.
    Mat lra_left() const { return C * core_left; }
    Mat lra_right() const { return core_right * R; }
};

namespace detail {

inline void check_cur_sizes(Index m, Index n, const CurOptions& o) {
    if (o.r < 1 || o.l < o.r || o.l > n || o.k < o.r || o.k > m)
        throw InputError("cur: need r <= l <= n and r <= k <= m");
}

// Returns false when sigma_r(W) is numerically zero.
inline bool set_nucleus(CurFactors& f, const Mat& W_raw, double rtol) {
    Mat W = f.row_scales.asDiagonal() * W_raw * f.col_scales.asDiagonal();
    SvdFactors s = svd(W);
    const Index r = f.r;
    if (rtol < 0) rtol = default_pinv_tol(W);
    if (s.sigma.size() < r || !(s.sigma(r - 1) > rtol * s.sigma(0))) return false;
    f.core_left = f.col_scales.asDiagonal() * s.V.leftCols(r) * s.sigma.head(r).cwiseInverse().asDiagonal();
    f.core_right = s.U.leftCols(r).transpose() * f.row_scales.asDiagonal();
    return true;
}

template <MatrixSource Src>
std::optional<CurFactors> cur_attempt(const Src& M, const CurOptions& o, const std::optional<ScorePair>& svd_scores,
                                      Rng& rng) {
    const Index m = M.rows(), n = M.cols();
    CurFactors f;
    f.r = o.r;
    f.score_source = o.source;

    SampleDist col_dist;
    switch (o.source) {
    case ScoreSource::uniform: col_dist = uniform_dist(n); break;
    case ScoreSource::svd: col_dist = make_dist(svd_scores->col, o.beta); break;
    case ScoreSource::supplied: col_dist = make_dist(o.supplied->col, o.beta); break;
    }
    SamplingPlan pc = sample(col_dist, o.l, o.mode, rng);
    f.col_idx = pc.picks;
    f.col_scales = plan_scales(pc);
    f.C = M.columns(f.col_idx);

    SampleDist row_dist;
    if (o.source == ScoreSource::uniform) {
        row_dist = uniform_dist(m);
    } else if (o.source == ScoreSource::supplied) {
        row_dist = make_dist(o.supplied->row, o.beta_bar);
    } else {
        Mat CD = f.C * f.col_scales.asDiagonal();
        const Index rr = std::min(o.r, CD.cols());
        row_dist = make_dist({Side::row, rr, top_row_scores(CD, rr)}, o.beta_bar);
    }
    SamplingPlan pr = sample(row_dist, o.k, o.mode, rng);
    f.row_idx = pr.picks;
    f.row_scales = plan_scales(pr);
    f.R = M.row_block(f.row_idx);

    // W's entries are already in C.
    if (!set_nucleus(f, f.C(f.row_idx, Eigen::all), o.nucleus_rtol)) return std::nullopt;
    return f;
}

} // namespace detail

template <MatrixSource Src>
CurFactors cur_leverage(const Src& M, const CurOptions& o, Rng& rng) {
    detail::check_cur_sizes(M.rows(), M.cols(), o);
    if (!(o.beta > 0 && o.beta <= 1 && o.beta_bar > 0 && o.beta_bar <= 1))
        throw InputError("cur: beta must be in (0, 1]");
    std::optional<ScorePair> svd_scores;
    if (o.source == ScoreSource::svd) svd_scores = o.supplied ? *o.supplied : scores_of_matrix(M.full(), o.r);
    if (o.source == ScoreSource::supplied) {
        if (!o.supplied || o.supplied->col.gamma.size() != M.cols() || o.supplied->row.gamma.size() != M.rows())
            throw InputError("cur: supplied scores missing or of wrong length");
    }
    for (int attempt = 0; attempt < 2; ++attempt)
        if (auto f = detail::cur_attempt(M, o, svd_scores, rng)) return *f;
    throw DegenerateSampleError("cur: sampled nucleus is rank deficient twice in a row");
}

inline CurFactors cur_leverage(const Mat& M, const CurOptions& o, Rng& rng) {
    require_finite(M, "cur_leverage");
    return cur_leverage(DenseSource(M), o, rng);
}

// C = M[:, J], R = M[I, :], U = pinv_r(M[I, J]) with r = |I| = |J|.
inline CurFactors canonical_cur(const Mat& M, const std::vector<Index>& I, const std::vector<Index>& J) {
    if (I.size() != J.size() || I.empty()) throw InputError("canonical_cur: need |I| = |J| >= 1");
    for (Index i : I)
        if (i < 0 || i >= M.rows()) throw InputError("canonical_cur: row index out of range");
    for (Index j : J)
        if (j < 0 || j >= M.cols()) throw InputError("canonical_cur: column index out of range");
    CurFactors f;
    f.r = Index(I.size());
    f.score_source = ScoreSource::supplied;
    f.row_idx = I;
    f.col_idx = J;
    f.row_scales = Vec::Ones(f.r);
    f.col_scales = Vec::Ones(f.r);
    f.C = M(Eigen::all, J);
    f.R = M(I, Eigen::all);
    if (!detail::set_nucleus(f, M(I, J), -1.0)) throw DegenerateSampleError("canonical_cur: generator is singular");
    return f;
}

// Unscaled variant: pinv_r(M[I, J]).
inline Mat nucleus_simple(const Mat& M, const CurFactors& f) {
    return truncated_pinv(M(f.row_idx, f.col_idx), f.r);
}

struct CurError {
    double absF = 0.0;
    double ratio = 0.0;     // absF / tailF
    bool tail_zero = false; // ratio is infinite (or undefined when absF = 0)
};

inline CurError cur_error(const Mat& M, const Mat& approx, double tailF) {
    if (M.rows() != approx.rows() || M.cols() != approx.cols()) throw InputError("cur_error: shape mismatch");
    CurError e;
    e.absF = (M - approx).norm();
    e.tail_zero = !(tailF > 1e-12 * M.norm());
    e.ratio = e.tail_zero ? (e.absF > 0 ? INFINITY : 0.0) : e.absF / tailF;
    return e;
}

inline CurError cur_error(const Mat& M, const CurFactors& f, double tailF) {
    return cur_error(M, f.reconstruct(), tailF);
}

struct DeltaAdversary {
    Index i = -1, j = -1;       // entry the sampler never read
    double err_base = 0.0;      // |L_ij - K_ij|
    double err_delta = 0.0;     // |L_ij - (K + Delta_ij)_ij|
    double max_err() const { return std::max(err_base, err_delta); }
};

// Runs uniform-score CUR on a fixed background K, finds an unread (i, j), and reruns
// on K + Delta_ij with the same random stream. Both runs see the same entries, so they
// return the same approximation, which is off by >= 1/2 on one of the two inputs.
inline DeltaAdversary delta_adversary(const Mat& K, const CurOptions& o, const Rng& rng) {
    if (o.source != ScoreSource::uniform) throw InputError("delta_adversary: needs the uniform-score path");
    CountingSource src(K);
    Rng r1 = rng;
    CurFactors f = cur_leverage(src, o, r1);
    DeltaAdversary out;
    for (Index j = 0; j < K.cols() && out.i < 0; ++j)
        for (Index i = 0; i < K.rows(); ++i)
            if (!src.was_read(i, j)) {
                out.i = i;
                out.j = j;
                break;
            }
    if (out.i < 0) throw InputError("delta_adversary: every entry was read");
    Mat KD = K;
    KD(out.i, out.j) += 1.0;
    Rng r2 = rng;
    CurFactors g = cur_leverage(KD, o, r2);
    const double L_base = f.reconstruct()(out.i, out.j);
    const double L_delta = g.reconstruct()(out.i, out.j);
    out.err_base = std::abs(L_base - K(out.i, out.j));
    out.err_delta = std::abs(L_delta - KD(out.i, out.j));
    return out;
}

} // namespace superfast
