#include <sstream>

#include <gtest/gtest.h>

#include <superfast/core.hpp>
#include <superfast/io.hpp>
#include <superfast/random.hpp>

using namespace superfast;

namespace {

Mat diag(std::initializer_list<double> d) {
    Vec v(d.size());
    Index i = 0;
    for (double x : d) v(i++) = x;
    return v.asDiagonal();
}

Mat random_rank(Index m, Index n, Index r, Rng& rng) { return gaussian(m, r, rng) * gaussian(r, n, rng); }

} // namespace

TEST(Norms, Identity) {
    Norms nm = matrix_norms(Mat::Identity(3, 3));
    EXPECT_NEAR(nm.frobenius, std::sqrt(3.0), 1e-15);
    EXPECT_NEAR(nm.spectral, 1.0, 1e-15);
}

TEST(Norms, Diagonal) {
    Norms nm = matrix_norms(diag({3, 4}));
    EXPECT_NEAR(nm.frobenius, 5.0, 1e-14);
    EXPECT_NEAR(nm.spectral, 4.0, 1e-14);
}

TEST(Norms, SpectralAgreesWithJacobi) {
    Rng rng(11);
    Mat G = gaussian(50, 30, rng);
    Eigen::JacobiSVD<Mat> jac(G);
    EXPECT_NEAR(spectral_norm(G), jac.singularValues()(0), 1e-10 * jac.singularValues()(0));
}

TEST(Norms, RejectsNonFinite) {
    Mat M = Mat::Ones(3, 3);
    M(1, 2) = std::numeric_limits<double>::quiet_NaN();
    EXPECT_THROW(matrix_norms(M), InputError);
    M(1, 2) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(svd(M), InputError);
}

TEST(Svd, DiagonalInput) {
    SvdFactors f = svd(diag({2, 1}));
    EXPECT_NEAR(f.sigma(0), 2.0, 1e-15);
    EXPECT_NEAR(f.sigma(1), 1.0, 1e-15);
    EXPECT_NEAR((f.U.cwiseAbs() - Mat::Identity(2, 2)).norm(), 0.0, 1e-14);
    EXPECT_NEAR((f.V.cwiseAbs() - Mat::Identity(2, 2)).norm(), 0.0, 1e-14);
}

TEST(Svd, RankOneOuterProduct) {
    Vec u(3), v(2);
    u << 1, 2, 2;
    v << 3, 4;
    SvdFactors f = svd(u * v.transpose());
    EXPECT_NEAR(f.sigma(0), 15.0, 1e-13);
    EXPECT_NEAR(f.sigma(1), 0.0, 1e-13);
}

TEST(Svd, GaussianReconstruction) {
    Rng rng(12);
    Mat M = gaussian(100, 100, rng);
    SvdFactors f = svd(M);
    Mat R = f.U * f.sigma.asDiagonal() * f.V.transpose();
    EXPECT_LE((M - R).norm(), 1e-10 * M.norm());
    EXPECT_LE(orthonormality_defect(f.U), 1e-10);
    EXPECT_LE(orthonormality_defect(f.V), 1e-10);
    for (Index i = 1; i < f.sigma.size(); ++i) EXPECT_GE(f.sigma(i - 1), f.sigma(i));
}

TEST(Svd, WideAndTallShapes) {
    Rng rng(13);
    for (auto [m, n] : {std::pair<Index, Index>{7, 19}, {19, 7}}) {
        Mat M = gaussian(m, n, rng);
        SvdFactors f = svd(M);
        EXPECT_EQ(f.U.rows(), m);
        EXPECT_EQ(f.V.rows(), n);
        EXPECT_EQ(f.sigma.size(), std::min(m, n));
        EXPECT_LE((M - f.U * f.sigma.asDiagonal() * f.V.transpose()).norm(), 1e-12 * M.norm());
    }
}

TEST(Svd, Deterministic) {
    Rng rng(14);
    Mat M = gaussian(40, 25, rng);
    SvdFactors a = svd(M), b = svd(M);
    EXPECT_EQ(a.sigma, b.sigma);
    EXPECT_EQ(a.U, b.U);
}

TEST(Truncate, DiagonalTails) {
    SvdFactors f = svd(diag({3, 2, 1}));
    TruncatedSvd t2 = truncate(f, 2);
    EXPECT_NEAR(t2.tail_spectral, 1.0, 1e-15);
    EXPECT_NEAR(t2.tail_frobenius, 1.0, 1e-15);
    TruncatedSvd t3 = truncate(f, 3);
    EXPECT_EQ(t3.tail_spectral, 0.0);
    EXPECT_EQ(t3.tail_frobenius, 0.0);
    TruncatedSvd t1 = truncate(f, 1);
    EXPECT_NEAR(t1.tail_frobenius, std::sqrt(5.0), 1e-14);
}

TEST(Truncate, TailMatchesDirectResidual) {
    Rng rng(15);
    Mat M = gaussian(60, 40, rng);
    TruncatedSvd t = truncated_svd(M, 10);
    Mat Mr = t.Ur * t.sigma_r.asDiagonal() * t.Vr.transpose();
    // residual norms of the best rank-r approximation equal sigma_{r+1} and the Frobenius tail
    EXPECT_NEAR((M - Mr).norm(), t.tail_frobenius, 1e-9 * t.tail_frobenius);
    EXPECT_NEAR(spectral_norm(M - Mr), t.tail_spectral, 1e-9);
    EXPECT_NEAR(t.tail_spectral, svd(M).sigma(10), 1e-9);
}

TEST(Truncate, RankOutOfRange) {
    SvdFactors f = svd(diag({3, 2, 1}));
    EXPECT_THROW(truncate(f, 0), InputError);
    EXPECT_THROW(truncate(f, 4), InputError);
    EXPECT_THROW(truncated_pinv(diag({3, 2, 1}), 4), InputError);
}

TEST(TailFrobenius, PastEnd) {
    Vec s(3);
    s << 3, 2, 1;
    EXPECT_EQ(tail_frobenius(s, 3), 0.0);
    EXPECT_EQ(tail_frobenius(s, 7), 0.0);
    EXPECT_NEAR(tail_frobenius(s, 0), std::sqrt(14.0), 1e-15);
}

TEST(NumericalRank, Modes) {
    Vec s(4);
    s << 10, 1, 1e-3, 1e-9;
    EXPECT_EQ(numerical_rank(s, 1e-6, RankTolerance::absolute), 3);
    EXPECT_EQ(numerical_rank(s, 1e-3, RankTolerance::relative), 2);
    EXPECT_EQ(numerical_rank(Vec(), 1e-6), 0);
}

TEST(Pinv, Diagonal) {
    Mat P = truncated_pinv(diag({2, 4}), 2);
    EXPECT_NEAR((P - diag({0.5, 0.25})).norm(), 0.0, 1e-15);
}

TEST(Pinv, NormIsInverseSmallestKeptSigma) {
    Rng rng(16);
    Mat G = gaussian(30, 20, rng);
    Vec s = singular_values(G);
    for (Index r : {1, 5, 20}) EXPECT_NEAR(spectral_norm(truncated_pinv(G, r)), 1.0 / s(r - 1), 1e-9 / s(r - 1));
}

TEST(Pinv, FullColumnRankIsLeftInverse) {
    Rng rng(17);
    Mat A = gaussian(20, 8, rng);
    Mat P = pinv(A);
    EXPECT_LE((P * A - Mat::Identity(8, 8)).norm(), 1e-12);
    Mat normal = (A.transpose() * A).inverse() * A.transpose();
    EXPECT_LE((P - normal).norm(), 1e-10 * normal.norm());
}

TEST(Pinv, ForcedRankTooHigh) {
    Rng rng(18);
    Mat A = random_rank(12, 10, 3, rng);
    EXPECT_THROW(truncated_pinv(A, 5), RankDeficiencyError);
    EXPECT_NO_THROW(truncated_pinv(A, 3));
}

TEST(Pinv, MoorePenroseIdentities) {
    Rng rng(19);
    for (int trial = 0; trial < 10; ++trial) {
        Mat A = random_rank(30, 20, 5, rng);
        for (const Mat& X : {truncated_pinv(A, 5), pinv(A)}) {
            const double s = A.norm() * X.norm();
            EXPECT_LE((A * X * A - A).norm(), 1e-9 * A.norm() * std::max(1.0, s));
            EXPECT_LE((X * A * X - X).norm(), 1e-9 * X.norm() * std::max(1.0, s));
            EXPECT_LE(((A * X).transpose() - A * X).norm(), 1e-9 * std::max(1.0, s));
            EXPECT_LE(((X * A).transpose() - X * A).norm(), 1e-9 * std::max(1.0, s));
        }
    }
}

TEST(Pinv, ZeroMatrix) {
    Mat P = pinv(Mat::Zero(3, 4));
    EXPECT_EQ(P.rows(), 4);
    EXPECT_EQ(P.norm(), 0.0);
}

// ||(AB)^+|| <= ||A^+|| ||B^+|| for full-rank A (k x r), B (r x l) with r <= k, l
TEST(Pinv, ProductInequality) {
    Rng rng(20);
    for (int c = 0; c < 100; ++c) {
        const Index r = 1 + Index(rng.uniform_index(6));
        const Index k = r + Index(rng.uniform_index(8));
        const Index l = r + Index(rng.uniform_index(8));
        Mat A = gaussian(k, r, rng), B = gaussian(r, l, rng);
        Mat PA = pinv(A), PB = pinv(B), PAB = pinv(A * B);
        EXPECT_LE(spectral_norm(PAB), spectral_norm(PA) * spectral_norm(PB) * (1 + 1e-9)) << "case " << c;
        EXPECT_LE(PAB.norm(), PA.norm() * PB.norm() * (1 + 1e-9)) << "case " << c;
    }
}

TEST(ThinQr, AlreadyOrthonormal) {
    Rng rng(21);
    Mat Q0 = orthonormalize(gaussian(30, 6, rng));
    ThinQr qr = thin_qr(Q0);
    EXPECT_LE((qr.Q - Q0).norm(), 1e-12);
    EXPECT_LE((qr.R - Mat::Identity(6, 6)).norm(), 1e-12);
}

TEST(ThinQr, Gaussian) {
    Rng rng(22);
    Mat M = gaussian(100, 20, rng);
    ThinQr qr = thin_qr(M);
    EXPECT_LE((qr.Q * qr.R - M).norm(), 1e-12 * M.norm());
    EXPECT_LE(orthonormality_defect(qr.Q), 1e-12);
    for (Index j = 0; j < 20; ++j) {
        EXPECT_GE(qr.R(j, j), 0.0);
        for (Index i = j + 1; i < 20; ++i) EXPECT_EQ(qr.R(i, j), 0.0);
    }
}

TEST(ThinQr, ScaledIdentityBlock) {
    Mat M = Mat::Zero(8, 5);
    M.topRows(5) = 5.0 * Mat::Identity(5, 5);
    ThinQr qr = thin_qr(M);
    EXPECT_LE((qr.R - 5.0 * Mat::Identity(5, 5)).norm(), 1e-14);
}

TEST(ThinQr, RejectsWide) { EXPECT_THROW(thin_qr(Mat::Ones(2, 3)), InputError); }

TEST(PrincipalAngle, Axioms) {
    Mat e1 = Mat::Zero(2, 1), e2 = Mat::Zero(2, 1);
    e1(0) = 1;
    e2(1) = 1;
    EXPECT_NEAR(principal_angle_dist(e1, e2), 1.0, 1e-15);
    EXPECT_NEAR(principal_angle_dist(e1, e1), 0.0, 1e-15);

    Rng rng(23);
    Mat G = orthonormalize(gaussian(20, 4, rng));
    EXPECT_NEAR(principal_angle_dist(G, G), 0.0, 1e-12);
    // same span, different basis
    Mat Q = orthonormalize(gaussian(4, 4, rng));
    EXPECT_NEAR(principal_angle_dist(G, G * Q), 0.0, 1e-12);
    // rank mismatch
    EXPECT_EQ(principal_angle_dist(G, G.leftCols(3)), 1.0);
    EXPECT_EQ(principal_angle_dist(G.leftCols(3), G), 1.0);
}

TEST(PrincipalAngle, SymmetricAndBounded) {
    Rng rng(24);
    for (int t = 0; t < 20; ++t) {
        Mat G = orthonormalize(gaussian(15, 3, rng)), H = orthonormalize(gaussian(15, 3, rng));
        double a = principal_angle_dist(G, H), b = principal_angle_dist(H, G);
        EXPECT_NEAR(a, b, 1e-12);
        EXPECT_GE(a, 0.0);
        EXPECT_LE(a, 1.0);
        EXPECT_GT(a, 1e-6);  // generic subspaces differ
    }
}

TEST(PrincipalAngle, KnownAngle) {
    const double th = 0.3;
    Mat G(2, 1), H(2, 1);
    G << 1, 0;
    H << std::cos(th), std::sin(th);
    EXPECT_NEAR(principal_angle_dist(G, H), std::sin(th), 1e-15);
}

TEST(PrincipalAngle, RejectsNonOrthonormal) {
    Mat G = Mat::Ones(5, 2);
    EXPECT_THROW(principal_angle_dist(G, G), InputError);
}

TEST(Io, RoundTripExact) {
    Rng rng(25);
    Mat M = gaussian(7, 5, rng);
    M(0, 0) = 1e-300;
    M(1, 1) = -0.0;
    std::stringstream ss;
    write_matrix(ss, M);
    Mat R = read_matrix(ss);
    EXPECT_EQ(R, M);
}

TEST(Io, ParseErrorsCarryLine) {
    std::stringstream bad("2 2\n1 2\n3 x\n");
    try {
        read_matrix(bad);
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    std::stringstream short_row("2 2\n1 2\n3\n");
    EXPECT_THROW(read_matrix(short_row), ParseError);
    std::stringstream missing("3 2\n1 2\n3 4\n");
    EXPECT_THROW(read_matrix(missing), ParseError);
    std::stringstream header("two 2\n");
    EXPECT_THROW(read_matrix(header), ParseError);
    std::stringstream nan("1 1\nnan\n");
    EXPECT_THROW(read_matrix(nan), ParseError);
}

TEST(Io, MissingFile) { EXPECT_THROW(read_matrix_file("/nonexistent/superfast.txt"), IoError); }
