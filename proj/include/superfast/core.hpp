#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include <superfast/errors.hpp>

namespace superfast {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using Index = Eigen::Index;

inline void require_finite(const Mat& M, std::string_view what) {
    if (!M.allFinite())
        throw InputError(std::string(what) + ": matrix has non-finite entries");
}

inline void require_nonempty(const Mat& M, std::string_view what) {
    if (M.rows() == 0 || M.cols() == 0)
        throw InputError(std::string(what) + ": empty matrix");
}

struct SvdFactors {
    Mat U;      // m x q, q = min(m, n)
    Vec sigma;  // non-increasing
    Mat V;      // n x q
};

struct TruncatedSvd {
    Index r = 0;
    Mat Ur;
    Vec sigma_r;
    Mat Vr;
    double tail_frobenius = 0.0;  // ||M - M_r||_F
    double tail_spectral = 0.0;   // sigma_{r+1}, 0 when r = min(m, n)
};

struct Norms {
    double frobenius = 0.0;
    double spectral = 0.0;
};

inline SvdFactors svd(const Mat& M) {
    require_finite(M, "svd");
    SvdFactors out;
    if (M.size() == 0) {
        out.U = Mat(M.rows(), 0);
        out.V = Mat(M.cols(), 0);
        return out;
    }
    Eigen::BDCSVD<Mat> dec(M, Eigen::ComputeThinU | Eigen::ComputeThinV);
    if (dec.info() != Eigen::Success)
        throw NumericalError("svd: decomposition did not converge");
    out.U = dec.matrixU();
    out.sigma = dec.singularValues();
    out.V = dec.matrixV();
    if (!out.U.allFinite() || !out.V.allFinite() || !out.sigma.allFinite())
        throw NumericalError("svd: non-finite factors");
    return out;
}

inline Vec singular_values(const Mat& M) {
    require_finite(M, "singular_values");
    if (M.size() == 0) return Vec();
    Eigen::BDCSVD<Mat> dec(M);
    if (dec.info() != Eigen::Success)
        throw NumericalError("singular_values: decomposition did not converge");
    return dec.singularValues();
}

inline double spectral_norm(const Mat& M) {
    Vec s = singular_values(M);
    return s.size() ? s(0) : 0.0;
}

inline Norms matrix_norms(const Mat& M) {
    require_finite(M, "matrix_norms");
    return {M.norm(), spectral_norm(M)};
}

// sqrt(sum_{j > r} sigma_j^2)
inline double tail_frobenius(const Vec& sigma, Index r) {
    if (r >= sigma.size()) return 0.0;
    return sigma.tail(sigma.size() - r).norm();
}

inline TruncatedSvd truncate(const SvdFactors& f, Index r) {
    const Index q = f.sigma.size();
    if (r < 1 || r > q)
        throw InputError("truncate: rank " + std::to_string(r) + " outside [1, " + std::to_string(q) + "]");
    TruncatedSvd t;
    t.r = r;
    t.Ur = f.U.leftCols(r);
    t.sigma_r = f.sigma.head(r);
    t.Vr = f.V.leftCols(r);
    t.tail_frobenius = tail_frobenius(f.sigma, r);
    t.tail_spectral = r < q ? f.sigma(r) : 0.0;
    return t;
}

inline TruncatedSvd truncated_svd(const Mat& M, Index r) { return truncate(svd(M), r); }

enum class RankTolerance { relative, absolute };

// Count of sigma_j > tol (absolute) or sigma_j > tol * sigma_1 (relative).
inline Index numerical_rank(const Vec& sigma, double tol, RankTolerance mode = RankTolerance::relative) {
    if (sigma.size() == 0) return 0;
    const double cut = mode == RankTolerance::relative ? tol * sigma(0) : tol;
    Index k = 0;
    while (k < sigma.size() && sigma(k) > cut) ++k;
    return k;
}

inline Index numerical_rank(const Mat& M, double tol, RankTolerance mode = RankTolerance::relative) {
    return numerical_rank(singular_values(M), tol, mode);
}

inline double default_pinv_tol(const Mat& M) {
    return static_cast<double>(std::max(M.rows(), M.cols())) * std::numeric_limits<double>::epsilon();
}

namespace detail {
inline Mat pinv_from(const SvdFactors& f, Index r, Index rows, Index cols) {
    if (r == 0) return Mat::Zero(cols, rows);
    Mat Vs = f.V.leftCols(r) * f.sigma.head(r).cwiseInverse().asDiagonal();
    return Vs * f.U.leftCols(r).transpose();
}
} // namespace detail

// Rank-r truncated pseudo-inverse. Throws if sigma_r is numerically zero.
inline Mat truncated_pinv(const Mat& M, Index r) {
    SvdFactors f = svd(M);
    const Index q = f.sigma.size();
    if (r < 1 || r > q)
        throw InputError("truncated_pinv: rank " + std::to_string(r) + " outside [1, " + std::to_string(q) + "]");
    if (!(f.sigma(r - 1) > default_pinv_tol(M) * f.sigma(0)))
        throw RankDeficiencyError("truncated_pinv: sigma_" + std::to_string(r) + " is numerically zero");
    return detail::pinv_from(f, r, M.rows(), M.cols());
}

// Pseudo-inverse dropping sigma_j <= rel_tol * sigma_1. Negative rel_tol selects max(m,n) * eps.
inline Mat pinv(const Mat& M, double rel_tol = -1.0) {
    SvdFactors f = svd(M);
    const double tol = rel_tol < 0 ? default_pinv_tol(M) : rel_tol;
    const Index r = numerical_rank(f.sigma, tol, RankTolerance::relative);
    return detail::pinv_from(f, r, M.rows(), M.cols());
}

struct ThinQr {
    Mat Q;  // m x n, orthonormal columns
    Mat R;  // n x n upper triangular, non-negative diagonal
};

// Requires m >= n.
inline ThinQr thin_qr(const Mat& M) {
    require_finite(M, "thin_qr");
    const Index m = M.rows(), n = M.cols();
    if (m < n) throw InputError("thin_qr: needs rows >= cols");
    Eigen::HouseholderQR<Mat> qr(M);
    ThinQr out;
    out.Q = qr.householderQ() * Mat::Identity(m, n);
    out.R = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();
    for (Index j = 0; j < n; ++j) {
        if (out.R(j, j) < 0) {
            out.R.row(j) *= -1.0;
            out.Q.col(j) *= -1.0;
        }
    }
    return out;
}

inline Mat orthonormalize(const Mat& M) { return thin_qr(M).Q; }

inline double orthonormality_defect(const Mat& Q) {
    return (Q.transpose() * Q - Mat::Identity(Q.cols(), Q.cols())).norm();
}

// ||(I - G G^T) H||_2 for orthonormal G, H spanning subspaces of equal dimension;
// 1 when the dimensions differ.
inline double principal_angle_dist(const Mat& G, const Mat& H, double ortho_tol = 1e-8) {
    if (G.rows() != H.rows()) throw InputError("principal_angle_dist: ambient dimensions differ");
    if (orthonormality_defect(G) > ortho_tol || orthonormality_defect(H) > ortho_tol)
        throw InputError("principal_angle_dist: inputs must have orthonormal columns");
    if (G.cols() != H.cols()) return 1.0;
    if (G.cols() == 0) return 0.0;
    Mat D = H - G * (G.transpose() * H);
    return std::clamp(spectral_norm(D), 0.0, 1.0);
}

} // namespace superfast
