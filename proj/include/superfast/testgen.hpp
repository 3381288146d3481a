#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/io.hpp>
#include <superfast/llsp.hpp>
#include <superfast/random.hpp>

namespace superfast {

// b = A w / ||A w|| + 0.001 v / ||v||.
inline Vec llsp_rhs(const Mat& A, Rng& rng) {
    const Vec w = gaussian(A.cols(), 1, rng);
    const Vec v = gaussian(A.rows(), 1, rng);
    const Vec Aw = A * w;
    return Aw / Aw.norm() + 1e-3 * v / v.norm();
}

inline LlspInstance gen_gaussian_llsp(Index m, Index d, Rng& rng) {
    if (!(d >= 1 && d < m)) throw InputError("gen_gaussian_llsp: need 1 <= d < m");
    Mat A = gaussian(m, d, rng);
    Vec b = llsp_rhs(A, rng);
    return LlspInstance(std::move(A), std::move(b));
}

// sigma_j = 10^{5-j} for j <= 14, 1e-10 afterwards (1-based j).
inline Vec ill_conditioned_spectrum(Index d) {
    Vec s(d);
    for (Index j = 1; j <= d; ++j) s(j - 1) = j <= 14 ? std::pow(10.0, 5.0 - double(j)) : 1e-10;
    return s;
}

inline Mat gen_ill_conditioned(Index m, Index d, Rng& rng) {
    if (!(d >= 1 && d <= m)) throw InputError("gen_ill_conditioned: need 1 <= d <= m");
    const Mat U = orthonormalize(gaussian(m, d, rng));
    const Mat V = orthonormalize(gaussian(d, d, rng));
    return U * ill_conditioned_spectrum(d).asDiagonal() * V.transpose();
}

inline LlspInstance gen_ill_conditioned_llsp(Index m, Index d, Rng& rng) {
    if (!(d >= 1 && d < m)) throw InputError("gen_ill_conditioned_llsp: need 1 <= d < m");
    Mat A = gen_ill_conditioned(m, d, rng);
    Vec b = llsp_rhs(A, rng);
    return LlspInstance(std::move(A), std::move(b));
}

// M_ij = 1 / (x_i - y_j), x ~ U(0, 100), y ~ U(100, 200).
inline Mat gen_cauchy(Index n, Rng& rng) {
    if (n < 1) throw InputError("gen_cauchy: n must be positive");
    Vec x(n), y(n);
    for (Index i = 0; i < n; ++i) x(i) = 100.0 * rng.uniform();
    for (Index j = 0; j < n; ++j) y(j) = 100.0 + 100.0 * rng.uniform();
    Mat M(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) M(i, j) = 1.0 / (x(i) - y(j));
    return M;
}

// log-kernel between n equispaced points on circles of radius 1 (targets) and 2 (sources),
// trapezoidal weights 2 pi / n.
inline Mat gen_single_layer(Index n) {
    if (n < 10) throw InputError("gen_single_layer: n must be at least 10");
    const double h = 2.0 * std::numbers::pi / double(n);
    Mat M(n, n);
    for (Index j = 0; j < n; ++j) {
        const double yx = 2.0 * std::cos(h * double(j)), yy = 2.0 * std::sin(h * double(j));
        for (Index i = 0; i < n; ++i) {
            const double dx = std::cos(h * double(i)) - yx, dy = std::sin(h * double(i)) - yy;
            M(i, j) = h * 0.5 * std::log(dx * dx + dy * dy);
        }
    }
    return M;
}

namespace detail {

inline Mat regu_shaw(Index n) {
    if (n % 2) throw InputError("shaw: n must be even");
    const double h = std::numbers::pi / double(n);
    Vec co(n), psi(n);
    for (Index i = 0; i < n; ++i) {
        const double t = -std::numbers::pi / 2 + (double(i) + 0.5) * h;
        co(i) = std::cos(t);
        psi(i) = std::numbers::pi * std::sin(t);
    }
    Mat A(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            const double ps = psi(i) + psi(j);
            const double sinc = ps == 0 ? 1.0 : std::sin(ps) / ps;
            const double v = (co(i) + co(j)) * sinc;
            A(i, j) = h * v * v;
        }
    return A;
}

inline Mat regu_baart(Index n) {
    const double hs = std::numbers::pi / (2.0 * double(n));
    const double ht = std::numbers::pi / double(n);
    const double c = 1.0 / (3.0 * std::sqrt(2.0));
    Vec ihs(n + 1);
    for (Index k = 0; k <= n; ++k) ihs(k) = double(k) * hs;
    auto diff_exp = [&](double co) {
        Vec f(n);
        for (Index i = 0; i < n; ++i) f(i) = (std::exp(ihs(i + 1) * co) - std::exp(ihs(i) * co)) / co;
        return f;
    };
    Mat A(n, n);
    Vec f3 = diff_exp(1.0);
    for (Index j = 1; j <= n; ++j) {
        const Vec f1 = f3;
        const Vec f2 = diff_exp(std::cos((double(j) - 0.5) * ht));
        if (2 * j == n)
            f3 = Vec::Constant(n, hs);
        else
            f3 = diff_exp(std::cos(double(j) * ht));
        A.col(j - 1) = c * (f1 + 4.0 * f2 + f3);
    }
    return A;
}

inline Mat regu_gravity(Index n) {
    const double dt = 1.0 / double(n), d = 0.25;
    Mat A(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            const double diff = dt * double(i - j);
            A(i, j) = dt * d / std::pow(d * d + diff * diff, 1.5);
        }
    return A;
}

inline Mat regu_wing(Index n) {
    const double h = 1.0 / double(n);
    Mat A(n, n);
    for (Index j = 0; j < n; ++j) {
        const double sj = (double(j) + 0.5) * h;
        for (Index i = 0; i < n; ++i) {
            const double si = (double(i) + 0.5) * h;
            A(i, j) = h * sj * std::exp(-si * sj * sj);
        }
    }
    return A;
}

inline Mat regu_foxgood(Index n) {
    const double h = 1.0 / double(n);
    Mat A(n, n);
    for (Index j = 0; j < n; ++j) {
        const double tj = (double(j) + 0.5) * h;
        for (Index i = 0; i < n; ++i) {
            const double ti = (double(i) + 0.5) * h;
            A(i, j) = h * std::sqrt(ti * ti + tj * tj);
        }
    }
    return A;
}

// Gauss-Laguerre quadrature of the Laplace transform, s_i = 10 i / n.
inline Mat regu_laplace(Index n) {
    Vec diag(n), sub(n - 1);
    for (Index i = 1; i <= n; ++i) diag(i - 1) = 2.0 * double(i) - 1.0;
    for (Index i = 1; i < n; ++i) sub(i - 1) = double(i);
    Eigen::SelfAdjointEigenSolver<Mat> es;
    es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("laplace: quadrature eigenproblem failed");
    const Vec t = es.eigenvalues();
    // w = t / ((n+1)^2 L_{n+1}(t)^2); the eigenvector route loses the tiny weights.
    auto log_abs_laguerre = [](Index deg, double x) {
        double p0 = 1.0, p1 = 1.0 - x, logscale = 0.0;
        for (Index k = 1; k < deg; ++k) {
            const double p2 = ((2.0 * double(k) + 1.0 - x) * p1 - double(k) * p0) / double(k + 1);
            p0 = p1;
            p1 = p2;
            const double a = std::abs(p1);
            if (a > 1e100 || (a < 1e-100 && a > 0)) {
                logscale += std::log(a);
                p0 /= a;
                p1 /= a;
            }
        }
        return logscale + std::log(std::abs(p1));
    };
    Mat A(n, n);
    for (Index j = 0; j < n; ++j) {
        const double logw = std::log(t(j)) - 2.0 * std::log(double(n + 1)) - 2.0 * log_abs_laguerre(n + 1, t(j));
        for (Index i = 0; i < n; ++i) {
            const double s = 10.0 * double(i + 1) / double(n);
            A(i, j) = std::exp(logw + (1.0 - s) * t(j));
        }
    }
    return A;
}

} // namespace detail

inline const std::vector<std::string>& regutools_names() {
    static const std::vector<std::string> names{"baart", "foxgood", "gravity", "laplace", "shaw", "wing"};
    return names;
}

inline Mat gen_regutools(const std::string& name, Index n) {
    if (n < 8) throw InputError("gen_regutools: n must be at least 8");
    if (name == "shaw") return detail::regu_shaw(n);
    if (name == "baart") return detail::regu_baart(n);
    if (name == "gravity") return detail::regu_gravity(n);
    if (name == "wing") return detail::regu_wing(n);
    if (name == "foxgood") return detail::regu_foxgood(n);
    if (name == "laplace") return detail::regu_laplace(n);
    throw InputError("gen_regutools: unknown problem '" + name + "'");
}

// Single 1 at (i, j), 0-based.
inline Mat gen_delta(Index m, Index n, Index i, Index j) {
    if (i < 0 || i >= m || j < 0 || j >= n) throw InputError("gen_delta: index out of range");
    Mat D = Mat::Zero(m, n);
    D(i, j) = 1.0;
    return D;
}

// Generator dispatch used by the `gen` subcommand.
inline Mat generate_named(const std::string& name, Index m, Index n, Index rank, Rng& rng) {
    if (name == "gaussian") return gaussian(m, n, rng);
    if (name == "cauchy") return gen_cauchy(n, rng);
    if (name == "single_layer") return gen_single_layer(n);
    if (name == "ill_conditioned") return gen_ill_conditioned(m, n, rng);
    if (name == "factor_gaussian") {
        FactorGaussianSpec spec;
        spec.m = m;
        spec.n = n;
        spec.rho = rank;
        return factor_gaussian(spec, rng).M;
    }
    for (const auto& r : regutools_names())
        if (name == r) return gen_regutools(name, n);
    throw InputError("unknown generator '" + name + "'");
}

enum class DatasetName { wine, housing };

struct DatasetSpec {
    DatasetName name = DatasetName::wine;
    std::string path;
    bool augment_bias = true;
    Index pad_rows = 2048;      // wine: padded row count; housing: sampled row count
    bool permute_rows = true;

    static DatasetSpec wine(std::string path) { return {DatasetName::wine, std::move(path), true, 2048, true}; }
    static DatasetSpec housing(std::string path) { return {DatasetName::housing, std::move(path), true, 16384, false}; }
};

inline std::string dataset_source_hint(DatasetName n) {
    return n == DatasetName::wine
               ? "download winequality-red.csv from "
                 "https://archive.ics.uci.edu/ml/machine-learning-databases/wine-quality/winequality-red.csv"
               : "download cal_housing.tgz from https://www.dcc.fc.up.pt/~ltorgo/Regression/cal_housing.html "
                 "and extract CaliforniaHousing/cal_housing.data";
}

// Numeric table with a fixed column count; an optional non-numeric header line is skipped.
inline std::vector<std::vector<double>> read_numeric_table(const std::string& path, std::size_t ncols) {
    std::ifstream f(path);
    if (!f) throw IoError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long lineno = 0;
    bool first = true;
    while (std::getline(f, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const char sep = line.find(';') != std::string::npos ? ';' : ',';
        auto fields = detail::split_fields(line, sep);
        std::vector<double> row;
        bool numeric = true;
        for (const auto& fld : fields) {
            double v;
            if (!detail::parse_double(fld, v)) {
                numeric = false;
                break;
            }
            row.push_back(v);
        }
        if (!numeric) {
            if (first) {
                first = false;
                continue;
            }
            throw ParseError(path + ": non-numeric field", lineno);
        }
        first = false;
        if (row.size() != ncols)
            throw ParseError(path + ": expected " + std::to_string(ncols) + " columns, found " +
                                 std::to_string(row.size()),
                             lineno);
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw ParseError(path + ": no data rows", lineno);
    return rows;
}

inline LlspInstance load_dataset(const DatasetSpec& spec, Rng& rng) {
    {
        std::ifstream probe(spec.path);
        if (!probe) throw IoError("dataset file '" + spec.path + "' not found; " + dataset_source_hint(spec.name));
    }
    const Index bias = spec.augment_bias ? 1 : 0;
    if (spec.name == DatasetName::wine) {
        auto rows = read_numeric_table(spec.path, 12);
        const Index k = Index(rows.size());
        if (k > spec.pad_rows) throw InputError("wine: more data rows than pad_rows");
        const Index d = 11 + bias;
        Mat A = Mat::Zero(spec.pad_rows, d);
        Vec b = Vec::Zero(spec.pad_rows);
        for (Index i = 0; i < k; ++i) {
            if (bias) A(i, 0) = 1.0;
            for (Index j = 0; j < 11; ++j) A(i, bias + j) = rows[i][j];
            b(i) = rows[i][11];
        }
        if (spec.permute_rows) {
            const auto p = random_permutation(spec.pad_rows, rng);
            A = Mat(A(p, Eigen::all));
            b = Vec(b(p));
        }
        return LlspInstance(std::move(A), std::move(b));
    }
    auto rows = read_numeric_table(spec.path, 9);
    const Index total = Index(rows.size());
    if (total < spec.pad_rows)
        throw InputError("housing: file has " + std::to_string(total) + " rows, need " + std::to_string(spec.pad_rows));
    auto pick = sample_without_replacement(total, spec.pad_rows, rng);
    if (!spec.permute_rows) std::sort(pick.begin(), pick.end());
    Mat A(spec.pad_rows, 8 + bias);
    Vec b(spec.pad_rows);
    for (Index i = 0; i < spec.pad_rows; ++i) {
        const auto& row = rows[pick[i]];
        for (Index j = 0; j < 8; ++j) A(i, j) = row[j];
        if (bias) A(i, 8) = 1.0;
        b(i) = row[8];
    }
    return LlspInstance(std::move(A), std::move(b));
}

} // namespace superfast
