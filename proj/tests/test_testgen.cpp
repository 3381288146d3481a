#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include <superfast/testgen.hpp>

using namespace superfast;
namespace fs = std::filesystem;

namespace {

Index abs_rank(const Mat& M) { return numerical_rank(M, 1e-6, RankTolerance::absolute); }

class TempDir {
public:
    TempDir() {
        Rng rng(std::uint64_t(std::chrono::steady_clock::now().time_since_epoch().count()));
        path_ = fs::temp_directory_path() / ("superfast_test_" + std::to_string(rng.next_u64()));
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    std::string file(const std::string& name) const { return (path_ / name).string(); }

private:
    fs::path path_;
};

void write_wine(const std::string& path, Index rows) {
    std::ofstream f(path);
    f << "\"fixed acidity\";\"volatile acidity\";\"citric acid\";\"residual sugar\";\"chlorides\";"
         "\"free sulfur dioxide\";\"total sulfur dioxide\";\"density\";\"pH\";\"sulphates\";\"alcohol\";\"quality\"\n";
    for (Index i = 0; i < rows; ++i) {
        for (int j = 0; j < 11; ++j) f << (1 + i % 7) * 0.5 + j << ';';
        f << 3 + i % 6 << '\n';
    }
}

void write_housing(const std::string& path, Index rows) {
    std::ofstream f(path);
    for (Index i = 0; i < rows; ++i) {
        for (int j = 0; j < 8; ++j) f << -120.0 + j + 1e-3 * double(i) << ',';
        f << 1000.0 * double(i) << '\n';
    }
}

} // namespace

TEST(GaussianLlsp, RhsConstruction) {
    Rng rng(1), twin(1);
    LlspInstance inst = gen_gaussian_llsp(300, 10, rng);
    // replay the draws to recover w
    Mat A = gaussian(300, 10, twin);
    Vec w = gaussian(10, 1, twin);
    Vec Aw = A * w;
    EXPECT_EQ(A, inst.A);
    EXPECT_NEAR((inst.b - Aw / Aw.norm()).norm(), 1e-3, 1e-15);
    EXPECT_LE(solve_exact(inst).residual, 1e-3);
}

TEST(GaussianLlsp, PaperSizes) {
    Rng rng(2);
    EXPECT_EQ(gen_gaussian_llsp(4096, 50, rng).m(), 4096);
    LlspInstance big = gen_gaussian_llsp(16384, 100, rng);
    EXPECT_EQ(big.d(), 100);
    EXPECT_THROW(gen_gaussian_llsp(10, 10, rng), InputError);
}

TEST(IllConditioned, Spectrum) {
    Vec s = ill_conditioned_spectrum(20);
    EXPECT_NEAR(s(0) / s(13), 1e13, 1e-2);
    EXPECT_NEAR(s(0), 1e4, 1e-12);
    EXPECT_EQ(s(14), 1e-10);
    EXPECT_NEAR(s(0) / s(19), 1e14, 1e0);  // sigma_1 / sigma_d
    Rng rng(3);
    Vec got = singular_values(gen_ill_conditioned(200, 20, rng));
    // backward-stable SVD: absolute error about ||A|| eps, so the small values are only good to ~1e-11
    for (Index j = 0; j < 14; ++j) EXPECT_NEAR(got(j), s(j), std::max(1e-8 * s(j), 1e-10)) << j;
    for (Index j = 14; j < 20; ++j) EXPECT_LE(got(j), 2e-10);
}

TEST(Cauchy, EntriesAndRank) {
    Rng rng(4), twin(4);
    Mat M = gen_cauchy(500, rng);
    EXPECT_LT(M.maxCoeff(), 0.0);
    EXPECT_GT(M.minCoeff(), -INFINITY);
    EXPECT_TRUE(M.allFinite());
    EXPECT_EQ(M, gen_cauchy(500, twin));
    EXPECT_LE(abs_rank(M), 30);
    EXPECT_LE(numerical_rank(M, 1e-6), 30);
}

TEST(SingleLayer, RotationalStructure) {
    const Index n = 64;
    Mat M = gen_single_layer(n);
    for (Index i = 0; i < n; ++i)
        for (Index j = 0; j < n; ++j) ASSERT_NEAR(M((i + 1) % n, (j + 1) % n), M(i, j), 1e-13);
    EXPECT_EQ(M, gen_single_layer(n));
    EXPECT_THROW(gen_single_layer(9), InputError);
}

TEST(SingleLayer, RankAtThousand) { EXPECT_LE(abs_rank(gen_single_layer(1000)), 40); }

TEST(SingleLayer, TailAtRankEleven) {
    Mat M = gen_single_layer(3000);
    Vec s = singular_values(M);
    const double rel = tail_frobenius(s, 11) / M.norm();
    EXPECT_LE(rel, 3e-3);
    EXPECT_GT(rel, 1e-3);  // the 1e-3 target is not reached by this discretization
}

TEST(Regutools, TableRanks) {
    const std::vector<std::pair<std::string, Index>> expect = {{"shaw", 12}, {"baart", 6}, {"gravity", 25}};
    for (const auto& [name, rank] : expect) {
        Mat M = gen_regutools(name, 1000);
        EXPECT_NEAR(double(abs_rank(M)), double(rank), 1.0) << name;
    }
}

TEST(Regutools, RelativeToleranceRanks) {
    // with sigma_j > 1e-6 sigma_1 two of the table ranks drift by more than one
    EXPECT_EQ(numerical_rank(gen_regutools("shaw", 1000), 1e-6), 11);
    EXPECT_EQ(numerical_rank(gen_regutools("gravity", 1000), 1e-6), 22);
}

TEST(Regutools, AllFiniteAndDeterministic) {
    for (const auto& name : regutools_names()) {
        Mat M = gen_regutools(name, 64);
        EXPECT_TRUE(M.allFinite()) << name;
        EXPECT_EQ(M, gen_regutools(name, 64)) << name;
        EXPECT_GT(M.norm(), 0.0) << name;
    }
    EXPECT_THROW(gen_regutools("heat", 64), InputError);
    EXPECT_THROW(gen_regutools("shaw", 4), InputError);
}

TEST(Regutools, ShawSymmetric) {
    Mat M = gen_regutools("shaw", 100);
    EXPECT_LE((M - M.transpose()).norm(), 1e-13 * M.norm());
    // persymmetric too: flipping both indices leaves the kernel unchanged
    EXPECT_LE((M - M.reverse()).norm(), 1e-13 * M.norm());
}

TEST(Regutools, LaplaceQuadrature) {
    // row i integrates exp(-s_i t) against the weights: sum_j A_ij ~ 1/s_i
    const Index n = 200;
    Mat M = gen_regutools("laplace", n);
    for (Index i = 0; i < n; i += 20) {
        const double s = 10.0 * double(i + 1) / double(n);
        EXPECT_NEAR(M.row(i).sum(), 1.0 / s, 1e-6 / s) << i;
    }
}

TEST(Delta, Basics) {
    Mat D = gen_delta(5, 4, 2, 3);
    EXPECT_EQ(D(2, 3), 1.0);
    EXPECT_NEAR(D.norm(), 1.0, 0);
    Vec s = singular_values(D);
    EXPECT_EQ(s(0), 1.0);
    EXPECT_EQ(s(1), 0.0);
    EXPECT_NE(D, Mat::Zero(5, 4));
    EXPECT_THROW(gen_delta(5, 4, 5, 0), InputError);
}

TEST(GenerateNamed, Dispatch) {
    Rng rng(5);
    EXPECT_EQ(generate_named("factor_gaussian", 30, 20, 4, rng).rows(), 30);
    EXPECT_EQ(abs_rank(generate_named("factor_gaussian", 30, 20, 4, rng)), 4);
    EXPECT_EQ(generate_named("shaw", 0, 16, 0, rng).cols(), 16);
    EXPECT_THROW(generate_named("nope", 4, 4, 1, rng), InputError);
}

TEST(Datasets, WineFixture) {
    TempDir dir;
    const auto path = dir.file("winequality-red.csv");
    write_wine(path, 1599);
    Rng rng(6);
    LlspInstance inst = load_dataset(DatasetSpec::wine(path), rng);
    EXPECT_EQ(inst.m(), 2048);
    EXPECT_EQ(inst.d(), 12);
    Index zero_rows = 0;
    for (Index i = 0; i < inst.m(); ++i) {
        if (inst.A.row(i).isZero(0)) {
            ++zero_rows;
            EXPECT_EQ(inst.b(i), 0.0);
        } else {
            EXPECT_EQ(inst.A(i, 0), 1.0);
        }
    }
    EXPECT_EQ(zero_rows, 449);
    // permuted: the data rows are not simply the first 1599
    EXPECT_FALSE(inst.A.bottomRows(449).isZero(0));
}

TEST(Datasets, HousingFixture) {
    TempDir dir;
    const auto path = dir.file("cal_housing.data");
    write_housing(path, 20640);
    Rng rng(7);
    LlspInstance inst = load_dataset(DatasetSpec::housing(path), rng);
    EXPECT_EQ(inst.m(), 16384);
    EXPECT_EQ(inst.d(), 9);
    EXPECT_TRUE((inst.A.col(8).array() == 1.0).all());
    for (Index i = 1; i < inst.m(); ++i) ASSERT_LT(inst.b(i - 1), inst.b(i));  // kept in file order
}

TEST(Datasets, Errors) {
    TempDir dir;
    Rng rng(8);
    try {
        load_dataset(DatasetSpec::wine(dir.file("missing.csv")), rng);
        FAIL();
    } catch (const IoError& e) {
        EXPECT_NE(std::string(e.what()).find("winequality-red.csv"), std::string::npos);
    }
    const auto bad = dir.file("bad.csv");
    {
        std::ofstream f(bad);
        f << "a;b\n1;2;3;4;5;6;7;8;9;10;11;12\n1;2;3;4;5;6;7;8;x;10;11;12\n";
    }
    try {
        load_dataset(DatasetSpec::wine(bad), rng);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.line(), 3);
    }
    const auto short_housing = dir.file("cal_housing.data");
    write_housing(short_housing, 100);
    EXPECT_THROW(load_dataset(DatasetSpec::housing(short_housing), rng), InputError);
    const auto text_col = dir.file("housing.csv");
    {
        std::ofstream f(text_col);
        f << "longitude,latitude,a,b,c,d,e,f,value\n-122,37,1,2,3,4,5,6,NEAR BAY\n";
    }
    EXPECT_THROW(load_dataset(DatasetSpec::housing(text_col), rng), ParseError);
}
