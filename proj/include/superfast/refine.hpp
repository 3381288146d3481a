#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/cur.hpp>
#include <superfast/llsp.hpp>
#include <superfast/random.hpp>
#include <superfast/sampling.hpp>

namespace superfast {

enum class RefineSolver { leverage, gaussian_embed, exact };

inline std::string to_string(RefineSolver s) {
    switch (s) {
    case RefineSolver::leverage: return "leverage";
    case RefineSolver::gaussian_embed: return "gaussian_embed";
    case RefineSolver::exact: return "exact";
    }
    return "?";
}

inline RefineSolver parse_refine_solver(const std::string& name) {
    if (name == "leverage") return RefineSolver::leverage;
    if (name == "gaussian_embed" || name == "gaussian") return RefineSolver::gaussian_embed;
    if (name == "exact") return RefineSolver::exact;
    throw InputError("unknown solver '" + name + "'");
}

struct RefineRecord {
    Index iter = 0;
    double distA = 0.0, distB = 0.0, err_ratio = 0.0, ms = 0.0;
};

struct RefinementState {
    Index t = 0;
    Mat A;  // m x r, orthonormal columns
    Mat B;  // r x n, paired with A
    std::vector<RefineRecord> history;
};

// Dense-SVD reference used only for metrics; the iteration never looks at it.
struct ReferenceSpectrum {
    Index r = 0;
    Mat Ur, Vr;
    Vec sigma;
    double tailF = 0.0;
};

inline ReferenceSpectrum reference_spectrum(const Mat& M, Index r) {
    SvdFactors f = svd(M);
    TruncatedSvd t = truncate(f, r);
    return {r, t.Ur, t.Vr, f.sigma, t.tail_frobenius};
}

// Left basis of a uniform-score CUR with k = l = r. That basis spans range(C) however badly W is
// conditioned (Cauchy blocks sit near 1e-16), so only an exactly singular W counts as degenerate:
// a zero sigma_r or a repeated index.
inline Mat init_factor(const Mat& M, Index r, Rng& rng) {
    if (r < 1 || r > std::min(M.rows(), M.cols())) throw InputError("init_factor: rank outside [1, min(m, n)]");
    CurOptions o;
    o.r = o.k = o.l = r;
    o.source = ScoreSource::uniform;
    o.nucleus_rtol = 0.0;
    for (int attempt = 0; attempt < 3; ++attempt) {
        try {
            CurFactors f = cur_leverage(M, o, rng);
            auto repeats = [](std::vector<Index> v) {
                std::sort(v.begin(), v.end());
                return std::adjacent_find(v.begin(), v.end()) != v.end();
            };
            if (repeats(f.row_idx) || repeats(f.col_idx)) continue;
            ThinQr qa = thin_qr(f.lra_left());
            ThinQr qb = thin_qr(f.lra_right().transpose());
            SvdFactors core = svd(qa.R * qb.R.transpose());
            return qa.Q * core.U.leftCols(r);
        } catch (const DegenerateSampleError&) {
        }
    }
    throw DegenerateSampleError("init_factor: no usable sample after 3 attempts");
}

struct StepResult {
    Mat A;       // orthonormalized input
    Mat B;       // r x n
    Mat A_next;  // m x r, empty unless requested
};

namespace detail {

inline Mat right_solve(const Mat& MSD, const Mat& BSD) {
    // X = MSD (BSD)^+ with a rank check on BSD.
    SvdFactors f = svd(BSD.transpose());
    const Index r = BSD.rows();
    if (numerical_rank(f.sigma, 1e-12) < r) throw DegenerateSampleError("refine: sampled factor lost rank");
    return MSD * detail::pinv_from(f, r, BSD.cols(), BSD.rows()).transpose();
}

template <class F>
auto with_retry(F&& f) {
    try {
        return f();
    } catch (const DegenerateSampleError&) {
        return f();
    }
}

} // namespace detail

// B = argmin over the sampled / embedded rows of ||A X - M||, A orthonormal m x r.
inline Mat update_right(const Mat& M, const Mat& A, Index l, double beta, RefineSolver solver, Rng& rng) {
    const Index m = M.rows(), r = A.cols();
    if (A.rows() != m) throw InputError("update_right: A has wrong row count");
    if (r < 1 || l < r) throw InputError("update_right: need 1 <= r <= l");
    switch (solver) {
    case RefineSolver::leverage: {
        const SampleDist pa = make_dist({Side::row, r, A.rowwise().squaredNorm()}, beta);
        return detail::with_retry([&] { return solve_generalized(A, M, sample_exact(pa, l, rng)).X; });
    }
    case RefineSolver::gaussian_embed: {
        if (l > m) throw InputError("update_right: embedding size exceeds row count");
        const Mat G = gaussian(l, m, rng);
        return pinv(G * A) * (G * M);
    }
    case RefineSolver::exact:
        return pinv(A) * M;
    }
    return {};
}

// A = argmin over the sampled / embedded columns of ||Y B - M||, B r x n.
inline Mat update_left(const Mat& M, const Mat& B, Index l, double beta, RefineSolver solver, Rng& rng) {
    const Index n = M.cols(), r = B.rows();
    if (B.cols() != n) throw InputError("update_left: B has wrong column count");
    if (r < 1 || l < r) throw InputError("update_left: need 1 <= r <= l");
    switch (solver) {
    case RefineSolver::leverage: {
        const Mat QB = orthonormalize(B.transpose());
        const SampleDist pb = make_dist({Side::column, r, QB.rowwise().squaredNorm()}, beta);
        return detail::with_retry([&] {
            SamplingPlan plan = sample_exact(pb, l, rng);
            return detail::right_solve(apply_plan(M, plan, Axis::cols), apply_plan(B, plan, Axis::cols));
        });
    }
    case RefineSolver::gaussian_embed: {
        if (l > n) throw InputError("update_left: embedding size exceeds column count");
        const Mat H = gaussian(n, l, rng);
        return (M * H) * pinv(B * H);
    }
    case RefineSolver::exact:
        return M * pinv(B);
    }
    return {};
}

inline StepResult refine_step(const Mat& M, const Mat& A_in, Index l, double beta, RefineSolver solver, Rng& rng,
                              bool want_next = true) {
    if (A_in.rows() != M.rows()) throw InputError("refine_step: A has wrong row count");
    StepResult out;
    out.A = orthonormalize(A_in);
    out.B = update_right(M, out.A, l, beta, solver, rng);
    if (want_next) out.A_next = update_left(M, out.B, l, beta, solver, rng);
    return out;
}

// t = 0..T: B_t from A_t, record metrics, then A_{t+1} from B_t while t < T.
inline RefinementState refine(const Mat& M, const Mat& A0, Index T, Index l, double beta, RefineSolver solver, Rng& rng,
                              const ReferenceSpectrum& ref) {
    if (T < 0) throw InputError("refine: T must be non-negative");
    if (ref.Ur.rows() != M.rows() || ref.r != A0.cols()) throw InputError("refine: reference does not match input");
    using clock = std::chrono::steady_clock;
    RefinementState st;
    Mat A = A0;
    for (Index t = 0; t <= T; ++t) {
        const auto t0 = clock::now();
        StepResult s = refine_step(M, A, l, beta, solver, rng, t < T);
        const double ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();

        RefineRecord rec;
        rec.iter = t;
        rec.ms = ms;
        rec.distA = principal_angle_dist(s.A, ref.Ur);
        rec.distB = principal_angle_dist(orthonormalize(s.B.transpose()), ref.Vr);
        rec.err_ratio = (M - s.A * s.B).norm() / ref.tailF;
        st.history.push_back(rec);

        st.t = t;
        st.A = s.A;
        st.B = s.B;
        if (t < T) A = s.A_next;
    }
    return st;
}

struct ContractionParams {
    double sigma_r = 0, sigma_r1 = 0, bar_sigma_r1 = 0;
    double theta = 0, delta = 0, eps = 0;
    double c = 0;
    bool c_finite = true;
    Index tau = 0;
    bool ratio_condition = false;  // (sigma_{r+1}/sigma_r) / sqrt(1 - delta^2) < 1
    bool eps_condition = false;    // eps theta < (delta/2)(sqrt(1 - delta^2) sigma_r/sigma_{r+1} - 1)
    bool contracts() const { return c_finite && c < 1.0; }
};

inline ContractionParams contraction_params(double sigma_r, double sigma_r1, double bar_sigma_r1, double delta,
                                            double eps) {
    if (!(delta >= 0 && delta < 1)) throw InputError("contraction_params: delta must be in [0, 1)");
    if (!(sigma_r > sigma_r1 && sigma_r1 >= 0)) throw InputError("contraction_params: need sigma_r > sigma_{r+1} >= 0");
    if (!(eps > 0)) throw InputError("contraction_params: eps must be positive");
    ContractionParams p;
    p.sigma_r = sigma_r;
    p.sigma_r1 = sigma_r1;
    p.bar_sigma_r1 = bar_sigma_r1;
    p.delta = delta;
    p.eps = eps;
    p.theta = sigma_r1 > 0 ? bar_sigma_r1 / sigma_r1 : 1.0;
    const double root = std::sqrt(1.0 - delta * delta);
    // (sigma_{r+1}/sigma_r)(1/root)(1 + 2 eps bar/(delta sigma_{r+1})), written without dividing by sigma_{r+1}
    p.c = (sigma_r1 + 2.0 * eps * bar_sigma_r1 / delta) / (sigma_r * root);
    p.c_finite = std::isfinite(p.c);
    p.tau = std::max<Index>(0, Index(std::ceil(0.5 * std::log(8.0 * p.theta * eps) / std::log(0.87))));
    p.ratio_condition = sigma_r1 / sigma_r / root < 1.0;
    p.eps_condition = sigma_r1 == 0 || eps * p.theta < 0.5 * delta * (root * sigma_r / sigma_r1 - 1.0);
    return p;
}

// Right-hand side of the single-step bound on dist(B, V_r) given dist(A, U_r) = delta.
inline double step_bound(double sigma_r, double sigma_r1, double tailF, double delta, double eps) {
    const double root = std::sqrt(1.0 - delta * delta);
    return delta / root * sigma_r1 / sigma_r + 2.0 * eps / root * tailF / sigma_r;
}

} // namespace superfast
