#pragma once

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <tuple>
#include <vector>

#include <superfast/core.hpp>
#include <superfast/cur.hpp>
#include <superfast/io.hpp>
#include <superfast/llsp.hpp>
#include <superfast/random.hpp>
#include <superfast/refine.hpp>
#include <superfast/sampling.hpp>
#include <superfast/sketch.hpp>
#include <superfast/testgen.hpp>

namespace superfast {

inline constexpr const char* kVersion = "0.1.0";

struct BenchConfig {
    std::uint64_t seed = 1;
    Index trials = 100;
    std::vector<std::string> inputs;       // empty: experiment default
    std::vector<std::string> multipliers;  // llsp
    std::vector<std::string> solvers;      // refine
    std::vector<std::string> sizes;        // llsp: "MxD"; others: "input:n"
    std::vector<Index> hs{2, 3, 4, 5, 6};
    std::string dataset_path;              // directory holding the dataset files
    int asph_depth = 3;
    Index block_count = 8;
    Index iters = 10;
    bool timing = true;
};

// Header, body rows and comment lines. Rows are sorted before writing.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> warnings;
    std::string experiment;

    void write(std::ostream& out, const BenchConfig& cfg) const {
        auto join = [&](const std::vector<std::string>& v) {
            for (std::size_t i = 0; i < v.size(); ++i) out << (i ? "," : "") << v[i];
            out << '\n';
        };
        join(header);
        for (const auto& r : rows) join(r);
        for (const auto& w : warnings) out << "# warning: " << w << '\n';
        out << "# seed=" << cfg.seed << " version=" << kVersion << " experiment=" << experiment << '\n';
    }
};

namespace detail {

inline std::string num(double x) { return format_double(x, 10); }
inline std::string num(Index x) { return std::to_string(x); }

inline double mean_of(const std::vector<double>& v) {
    double s = 0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / double(v.size());
}

inline double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1));
}

inline double quantile(std::vector<double> v, double q) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = q * double(v.size() - 1);
    const auto lo = std::size_t(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - double(lo)) * (v[hi] - v[lo]);
}

inline double median(std::vector<double> v) { return quantile(std::move(v), 0.5); }

inline std::uint64_t stream_for(std::string_view label, std::uint64_t k = 0) { return stream_id(stream_id(label), k); }

inline double elapsed_ms(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

inline std::pair<Index, Index> parse_mxd(const std::string& s) {
    const auto x = s.find('x');
    long m = 0, d = 0;
    if (x == std::string::npos || !parse_index(s.substr(0, x), m) || !parse_index(s.substr(x + 1), d) || m < 2 ||
        d < 1 || d >= m)
        throw InputError("size '" + s + "' must look like MxD with 1 <= D < M");
    return {m, d};
}

// "input:n" overrides; returns fallback when absent.
inline Index size_for(const BenchConfig& cfg, const std::string& input, Index fallback) {
    for (const auto& s : cfg.sizes) {
        const auto c = s.find(':');
        if (c == std::string::npos) throw InputError("size '" + s + "' must look like input:n");
        long n = 0;
        if (!parse_index(s.substr(c + 1), n) || n < 1) throw InputError("size '" + s + "' has a bad count");
        if (s.substr(0, c) == input) return n;
    }
    return fallback;
}

inline std::vector<std::string> or_default(const std::vector<std::string>& v, std::vector<std::string> def) {
    return v.empty() ? def : v;
}

inline void check_known(const std::vector<std::string>& v, const std::vector<std::string>& known, const char* what) {
    for (const auto& x : v)
        if (std::find(known.begin(), known.end(), x) == known.end())
            throw InputError(std::string("unknown ") + what + " '" + x + "'");
}

inline void sort_rows(CsvTable& t) {
    // Cells compare numerically when both parse as numbers, as strings otherwise.
    std::stable_sort(t.rows.begin(), t.rows.end(), [](const auto& a, const auto& b) {
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (a[i] == b[i]) continue;
            double x, y;
            if (parse_double(a[i], x) && parse_double(b[i], y)) return x < y;
            return a[i] < b[i];
        }
        return false;
    });
}

} // namespace detail

inline void validate(const BenchConfig& cfg) {
    if (cfg.trials < 1) throw InputError("trials must be at least 1");
    if (cfg.iters < 0) throw InputError("iters must be non-negative");
    for (Index h : cfg.hs)
        if (h < 1) throw InputError("h must be positive");
}

// ---- LLSP: sketched vs exact residual ratios ------------------------------------------------

inline CsvTable run_llsp_bench(const BenchConfig& cfg) {
    validate(cfg);
    using namespace detail;
    const auto inputs = or_default(cfg.inputs, {"gaussian", "ill_conditioned", "wine", "housing"});
    const auto mults = or_default(cfg.multipliers, {"perm", "blockperm", "asph", "gaussian"});
    check_known(inputs, {"gaussian", "ill_conditioned", "wine", "housing"}, "llsp input");
    check_known(mults, {"perm", "blockperm", "asph", "gaussian"}, "multiplier");
    const auto sizes = or_default(cfg.sizes, {"4096x50"});

    CsvTable t;
    t.experiment = "llsp";
    t.header = {"input_class", "multiplier", "m", "d", "h", "trials", "mean_ratio", "std_ratio", "mean_ms"};

    struct Job {
        std::string input;
        LlspInstance inst;
    };
    std::vector<Job> jobs;
    for (const auto& input : inputs) {
        if (input == "wine" || input == "housing") {
            const auto file = input == "wine" ? "winequality-red.csv" : "cal_housing.data";
            const auto path = (std::filesystem::path(cfg.dataset_path) / file).string();
            if (cfg.dataset_path.empty() || !std::filesystem::exists(path)) {
                t.warnings.push_back(input + " skipped: " + path + " not found; " +
                                     dataset_source_hint(input == "wine" ? DatasetName::wine : DatasetName::housing));
                continue;
            }
            Rng rng(cfg.seed, stream_for("llsp/data/" + input));
            auto spec = input == "wine" ? DatasetSpec::wine(path) : DatasetSpec::housing(path);
            jobs.push_back({input, load_dataset(spec, rng)});
            continue;
        }
        for (const auto& sz : sizes) {
            auto [m, d] = parse_mxd(sz);
            Rng rng(cfg.seed, stream_for("llsp/" + input + "/" + sz));
            jobs.push_back({input, input == "gaussian" ? gen_gaussian_llsp(m, d, rng) : gen_ill_conditioned_llsp(m, d, rng)});
        }
    }

    for (const auto& job : jobs) {
        const Index m = job.inst.m(), d = job.inst.d();
        const double optimal = solve_exact(job.inst).residual;
        for (const auto& mult : mults) {
            const SketchKind kind = parse_sketch_kind(mult);
            for (Index h : cfg.hs) {
                const Index s = d * h;
                if (s > m) throw InputError("sketch size d*h exceeds m");
                Index param = kind == SketchKind::asph ? cfg.asph_depth : kind == SketchKind::block_perm ? cfg.block_count : 0;
                if (kind == SketchKind::block_perm && param * s > m) {
                    param = m / s;
                    t.warnings.push_back("blockperm on " + job.input + " h=" + std::to_string(h) + ": block count reduced to " +
                                         std::to_string(param) + " so that c*s <= m");
                }
                std::vector<double> ratios, ms;
                const std::string label = "llsp/" + job.input + "/" + std::to_string(m) + "x" + std::to_string(d) + "/" +
                                          mult + "/" + std::to_string(h);
                for (Index trial = 0; trial < cfg.trials; ++trial) {
                    Rng rng(cfg.seed, stream_for(label, std::uint64_t(trial)));
                    const auto t0 = std::chrono::steady_clock::now();
                    SketchOp F = build_sketch(kind, s, m, param, rng);
                    LlspResult res = sketch_solve(job.inst, F, optimal);
                    ms.push_back(elapsed_ms(t0));
                    ratios.push_back(*res.ratio);
                }
                t.rows.push_back({job.input, mult, num(m), num(d), num(h), num(cfg.trials), num(mean_of(ratios)),
                                  num(std_of(ratios)), num(cfg.timing ? mean_of(ms) : 0.0)});
            }
        }
    }
    sort_rows(t);
    return t;
}

// ---- CUR: uniform vs svd scores ---------------------------------------------------------------

struct NamedInput {
    std::string name;
    Mat M;
    Index r;
};

inline NamedInput make_bench_input(const std::string& name, Index n, std::uint64_t seed) {
    Rng rng(seed, detail::stream_for("input/" + name, std::uint64_t(n)));
    if (name == "factor_gaussian") {
        FactorGaussianSpec spec;
        spec.m = spec.n = n;
        spec.rho = std::min<Index>(25, n);
        Mat M = factor_gaussian(spec, rng).M;
        return {name, perturb(M, 1e-5, rng), spec.rho};
    }
    if (name == "shaw") return {name, gen_regutools("shaw", n), 10};
    if (name == "cauchy") return {name, gen_cauchy(n, rng), 10};
    if (name == "single_layer") return {name, gen_single_layer(n), 11};
    throw InputError("unknown input '" + name + "'");
}

inline Index default_size(const std::string& name) {
    if (name == "cauchy") return 2000;
    if (name == "single_layer") return 3000;
    return 1000;
}

inline CsvTable run_cur_bench(const BenchConfig& cfg) {
    validate(cfg);
    using namespace detail;
    const auto inputs = or_default(cfg.inputs, {"factor_gaussian", "shaw", "cauchy", "single_layer"});
    check_known(inputs, {"factor_gaussian", "shaw", "cauchy", "single_layer"}, "cur input");
    CsvTable t;
    t.experiment = "cur";
    t.header = {"input_class", "r", "k", "l", "score_source", "trials", "mean_absF", "mean_ratio", "p90_ratio"};

    for (const auto& name : inputs) {
        NamedInput in = make_bench_input(name, size_for(cfg, name, default_size(name)), cfg.seed);
        const Index n = std::min(in.M.rows(), in.M.cols());
        SvdFactors f = svd(in.M);
        const double tailF = tail_frobenius(f.sigma, in.r);
        const ScorePair svd_scores{{Side::row, in.r, f.U.leftCols(in.r).rowwise().squaredNorm()},
                                   {Side::column, in.r, f.V.leftCols(in.r).rowwise().squaredNorm()}};
        for (ScoreSource src : {ScoreSource::svd, ScoreSource::uniform}) {
            CurOptions o;
            o.r = in.r;
            o.k = o.l = std::min(15 * in.r, n);
            o.source = src;
            if (src == ScoreSource::svd) o.supplied = svd_scores;
            std::vector<double> absF, ratio;
            const std::string label = "cur/" + name + "/" + to_string(src);
            for (Index trial = 0; trial < cfg.trials; ++trial) {
                Rng rng(cfg.seed, stream_for(label, std::uint64_t(trial)));
                CurError e = cur_error(in.M, cur_leverage(in.M, o, rng), tailF);
                absF.push_back(e.absF);
                ratio.push_back(e.ratio);
            }
            t.rows.push_back({name, num(o.r), num(o.k), num(o.l), to_string(src), num(cfg.trials), num(mean_of(absF)),
                              num(mean_of(ratio)), num(quantile(ratio, 0.9))});
        }
    }

    // Rank-1 background plus a delta the uniform sampler never reads.
    {
        const Index n = 64, r = 1, kl = 8;
        const Mat K = Mat::Ones(n, n);
        CurOptions o;
        o.r = r;
        o.k = o.l = kl;
        std::vector<double> worst, ratio;
        for (Index trial = 0; trial < cfg.trials; ++trial) {
            const Rng rng(cfg.seed, stream_for("cur/delta", std::uint64_t(trial)));
            DeltaAdversary a = delta_adversary(K, o, rng);
            worst.push_back(a.max_err());
            Mat KD = K + gen_delta(n, n, a.i, a.j);
            Rng r2 = rng;
            ratio.push_back(cur_error(KD, cur_leverage(KD, o, r2), tail_frobenius(singular_values(KD), r)).ratio);
        }
        t.rows.push_back({"delta", num(r), num(kl), num(kl), "uniform", num(cfg.trials), num(mean_of(worst)),
                          num(mean_of(ratio)), num(quantile(ratio, 0.9))});
    }
    sort_rows(t);
    return t;
}

// ---- Refinement ------------------------------------------------------------------------------

struct RefineRun {
    std::string input, solver;
    Index r, l;
    std::vector<std::vector<RefineRecord>> reps;  // per repetition, per iteration
};

inline std::vector<RefineRun> refine_runs(const BenchConfig& cfg) {
    validate(cfg);
    using namespace detail;
    const auto inputs = or_default(cfg.inputs, {"shaw", "cauchy", "single_layer"});
    const auto solvers = or_default(cfg.solvers, {"leverage", "gaussian_embed", "exact"});
    check_known(inputs, {"factor_gaussian", "shaw", "cauchy", "single_layer"}, "refine input");
    check_known(solvers, {"leverage", "gaussian_embed", "exact"}, "solver");
    std::vector<RefineRun> out;
    for (const auto& name : inputs) {
        NamedInput in = make_bench_input(name, size_for(cfg, name, default_size(name)), cfg.seed);
        const ReferenceSpectrum ref = reference_spectrum(in.M, in.r);
        const Index l = std::min({15 * in.r, in.M.rows(), in.M.cols()});
        std::vector<RefineRun> runs;
        for (const auto& s : solvers) runs.push_back({name, s, in.r, l, {}});
        for (Index rep = 0; rep < cfg.trials; ++rep) {
            Rng init_rng(cfg.seed, stream_for("refine/init/" + name, std::uint64_t(rep)));
            const Mat A0 = init_factor(in.M, in.r, init_rng);
            for (auto& run : runs) {
                Rng rng(cfg.seed, stream_for("refine/" + name + "/" + run.solver, std::uint64_t(rep)));
                RefinementState st = refine(in.M, A0, cfg.iters, l, 1.0, parse_refine_solver(run.solver), rng, ref);
                run.reps.push_back(st.history);
            }
        }
        for (auto& run : runs) out.push_back(std::move(run));
    }
    return out;
}

inline CsvTable refine_table(const std::vector<RefineRun>& runs, const BenchConfig& cfg) {
    using namespace detail;
    CsvTable t;
    t.experiment = "refine";
    t.header = {"input_class", "solver", "r", "l", "iter", "distA", "distB", "err_ratio", "ms"};
    for (const auto& run : runs) {
        const std::size_t T = run.reps.front().size();
        for (std::size_t it = 0; it < T; ++it) {
            std::vector<double> a, b, e, ms;
            for (const auto& rep : run.reps) {
                a.push_back(rep[it].distA);
                b.push_back(rep[it].distB);
                e.push_back(rep[it].err_ratio);
                ms.push_back(rep[it].ms);
            }
            t.rows.push_back({run.input, run.solver, num(run.r), num(run.l), num(Index(it)), num(mean_of(a)),
                              num(mean_of(b)), num(mean_of(e)), num(cfg.timing ? mean_of(ms) : 0.0)});
        }
    }
    sort_rows(t);
    return t;
}

inline CsvTable run_refine_bench(const BenchConfig& cfg) { return refine_table(refine_runs(cfg), cfg); }

// ---- Leverage-score perturbation -------------------------------------------------------------

struct LscoreRow {
    std::string input;
    Index r = 0, nrank = 0, trials = 0;
    std::vector<double> lra_err, score_err;
};

inline const std::vector<std::pair<std::string, std::vector<Index>>>& lscore_default_ranks() {
    static const std::vector<std::pair<std::string, std::vector<Index>>> table{
        {"baart", {4, 6, 8}},       {"foxgood", {8, 10, 12}}, {"gravity", {23, 25, 27}},
        {"laplace", {23, 25, 27}},  {"shaw", {10, 12, 14}},   {"wing", {2, 4, 6}},
        {"factor_gaussian", {25, 50, 75}}};
    return table;
}

// LRA: uniform-score CUR with k = l = min(15 r, n). Score error: max over rows and columns.
inline LscoreRow lscore_case(const std::string& name, const Mat& M, Index r, Index nrank, Index trials,
                             std::uint64_t seed) {
    LscoreRow row{name, r, nrank, 0, {}, {}};
    const ScorePair exact = scores_of_matrix(M, r);
    const double normF = M.norm();
    CurOptions o;
    o.r = r;
    o.k = std::min(15 * r, M.rows());
    o.l = std::min(15 * r, M.cols());
    for (Index trial = 0; trial < trials; ++trial) {
        Rng rng(seed, detail::stream_for("lscore/" + name + "/" + std::to_string(r), std::uint64_t(trial)));
        try {
            CurFactors f = cur_leverage(M, o, rng);
            const Mat A = f.lra_left(), B = f.lra_right();
            const ScorePair approx = scores_of_lra(A, B, r);
            const double err = std::max((exact.row.gamma - approx.row.gamma).cwiseAbs().maxCoeff(),
                                        (exact.col.gamma - approx.col.gamma).cwiseAbs().maxCoeff());
            row.lra_err.push_back((M - A * B).norm() / normF);
            row.score_err.push_back(err);
            ++row.trials;
        } catch (const DegenerateSampleError&) {
        } catch (const NumericalError&) {
        }
    }
    return row;
}

inline Mat lscore_input(const std::string& name, Index n, Index r, std::uint64_t seed, Index* nrank) {
    if (name == "factor_gaussian") {
        Rng rng(seed, detail::stream_for("lscore/input/factor_gaussian", std::uint64_t(r)));
        FactorGaussianSpec spec;
        spec.m = spec.n = n;
        spec.rho = r;
        *nrank = r;
        return perturb(factor_gaussian(spec, rng).M, 1e-5, rng);
    }
    Mat M = gen_regutools(name, n);
    *nrank = numerical_rank(singular_values(M), 1e-6, RankTolerance::absolute);
    return M;
}

inline CsvTable run_lscore_perturb(const BenchConfig& cfg) {
    validate(cfg);
    using namespace detail;
    std::vector<std::string> known;
    for (const auto& [name, ranks] : lscore_default_ranks()) known.push_back(name);
    const auto inputs = or_default(cfg.inputs, known);
    check_known(inputs, known, "lscore input");
    CsvTable t;
    t.experiment = "lscore";
    t.header = {"input_class", "r", "nrank", "trials", "mean_lra_err", "std_lra_err", "mean_score_err", "std_score_err"};
    for (const auto& [name, ranks] : lscore_default_ranks()) {
        if (std::find(inputs.begin(), inputs.end(), name) == inputs.end()) continue;
        const Index n = size_for(cfg, name, 1000);
        Mat M;
        Index nrank = 0;
        if (name != "factor_gaussian") M = lscore_input(name, n, 0, cfg.seed, &nrank);
        for (Index r : ranks) {
            if (name == "factor_gaussian") M = lscore_input(name, n, r, cfg.seed, &nrank);
            try {
                LscoreRow row = lscore_case(name, M, r, nrank, cfg.trials, cfg.seed);
                t.rows.push_back({name, num(r), num(row.nrank), num(row.trials), num(mean_of(row.lra_err)),
                                  num(std_of(row.lra_err)), num(mean_of(row.score_err)), num(std_of(row.score_err))});
            } catch (const IllPosedScoresError& e) {
                t.warnings.push_back(name + " r=" + std::to_string(r) + " skipped: " + e.what());
            }
        }
    }
    sort_rows(t);
    return t;
}

} // namespace superfast
