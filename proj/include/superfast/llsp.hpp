#pragma once

#include <optional>

#include <superfast/core.hpp>
#include <superfast/random.hpp>
#include <superfast/sampling.hpp>
#include <superfast/sketch.hpp>

namespace superfast {

// min_x ||A x - b|| with A m x d, d < m.
struct LlspInstance {
    Mat A;
    Vec b;

    LlspInstance() = default;
    LlspInstance(Mat A_, Vec b_) : A(std::move(A_)), b(std::move(b_)) { validate(); }

    void validate() const {
        if (A.rows() != b.size()) throw InputError("LlspInstance: A and b have different row counts");
        if (A.cols() < 1 || A.cols() >= A.rows()) throw InputError("LlspInstance: need 1 <= d < m");
        require_finite(A, "LlspInstance");
        if (!b.allFinite()) throw InputError("LlspInstance: b has non-finite entries");
    }

    Index m() const { return A.rows(); }
    Index d() const { return A.cols(); }

    Mat augmented() const {
        Mat M(A.rows(), A.cols() + 1);
        M << A, b;
        return M;
    }

    static LlspInstance from_augmented(const Mat& M) {
        return LlspInstance(M.leftCols(M.cols() - 1), M.col(M.cols() - 1));
    }
};

struct LlspResult {
    Vec x;
    double residual = 0.0;
    std::optional<double> ratio;  // residual / optimal residual
};

inline double residual_norm(const LlspInstance& inst, const Vec& x) { return (inst.A * x - inst.b).norm(); }

inline LlspResult solve_exact(const LlspInstance& inst) {
    LlspResult r;
    r.x = pinv(inst.A) * inst.b;
    r.residual = residual_norm(inst, r.x);
    return r;
}

// Solve the sketched problem min ||F A u - F b||, report the residual on the original.
inline LlspResult sketch_solve(const LlspInstance& inst, const SketchOp& F,
                               std::optional<double> optimal_residual = std::nullopt) {
    if (F.s < inst.d()) throw InputError("sketch_solve: sketch size below d");
    Mat FM = apply_sketch(F, inst.augmented());
    const Index d = inst.d();
    LlspResult r;
    r.x = pinv(FM.leftCols(d)) * FM.col(d);
    r.residual = residual_norm(inst, r.x);
    if (optimal_residual) r.ratio = *optimal_residual > 0 ? r.residual / *optimal_residual
                                                          : (r.residual > 0 ? INFINITY : 1.0);
    return r;
}

struct DualCheckStats {
    double mean = 0.0;      // entries of (1/(ab)) F M
    double variance = 0.0;
    Index entries = 0;
    double mean_ratio = 0.0;
    double min_ratio = 0.0;
};

// F = a Q (Q the default-scaled orthogonal sketch), M = b G with a b sqrt(s) = 1.
// Moments are taken on (1/(ab)) F M, which is standard Gaussian when F F^T = a^2 I.
inline DualCheckStats dual_llsp_check(Index s, Index m, Index d, double a, double b, SketchKind kind,
                                      Index param, Index trials, Rng& rng, SketchOptions opts = {}) {
    if (std::abs(a * b * std::sqrt(double(s)) - 1.0) > 1e-12) throw InputError("dual_llsp_check: need a b sqrt(s) = 1");
    if (!(d <= s && s < m)) throw InputError("dual_llsp_check: need d <= s < m");
    if (kind == SketchKind::gaussian) throw InputError("dual_llsp_check: multiplier must be scaled orthogonal");
    if (trials < 1) throw InputError("dual_llsp_check: trials must be positive");
    DualCheckStats st;
    double sum = 0.0, sumsq = 0.0, rsum = 0.0;
    st.min_ratio = INFINITY;
    for (Index t = 0; t < trials; ++t) {
        SketchOp F = build_sketch(kind, s, m, param, rng, opts);
        Mat M = b * gaussian(m, d + 1, rng);
        Mat FM = a * apply_sketch(F, M);
        Mat Z = FM / (a * b);
        sum += Z.sum();
        sumsq += Z.squaredNorm();
        st.entries += Z.size();

        auto inst = LlspInstance::from_augmented(M);
        const double opt = solve_exact(inst).residual;
        const Vec x = pinv(FM.leftCols(d)) * FM.col(d);
        const double ratio = residual_norm(inst, x) / opt;
        rsum += ratio;
        st.min_ratio = std::min(st.min_ratio, ratio);
    }
    const double N = double(st.entries);
    st.mean = sum / N;
    st.variance = sumsq / N - st.mean * st.mean;
    st.mean_ratio = rsum / double(trials);
    return st;
}

struct GeneralizedSolution {
    Mat X;               // r x n
    Index sampled_rank;  // rank of D^T S^T A
};

// X = (D^T S^T A)^+ D^T S^T M for a plan over the rows of A and M.
inline GeneralizedSolution solve_generalized(const Mat& A, const Mat& M, const SamplingPlan& plan) {
    if (A.rows() != M.rows()) throw InputError("solve_generalized: A and M have different row counts");
    const Index r = A.cols();
    Mat SA = apply_plan(A, plan, Axis::rows);
    Mat SM = apply_plan(M, plan, Axis::rows);
    SvdFactors f = svd(SA);
    const Index rank = numerical_rank(f.sigma, 1e-12);
    if (rank < r) throw DegenerateSampleError("solve_generalized: sampled factor lost rank");
    GeneralizedSolution out;
    out.X = detail::pinv_from(f, r, SA.rows(), SA.cols()) * SM;
    out.sampled_rank = rank;
    return out;
}

} // namespace superfast
