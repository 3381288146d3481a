// Benchmark harness: llsp-bench, cur-bench, refine-bench, lscore-perturb, gen.
// Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include <superfast/bench.hpp>

using namespace superfast;

namespace {

struct Common {
    std::uint64_t seed = 1;
    std::optional<long> trials;
    std::string out = "-";
    std::vector<std::string> inputs, sizes;
    std::string dataset_path;
    bool no_timing = false;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--seed", c.seed, "RNG seed")->capture_default_str();
    sub->add_option("--trials", c.trials, "Trials (repetitions for refine-bench)");
    sub->add_option("--out", c.out, "Output CSV path, - for stdout")->capture_default_str();
    sub->add_option("--inputs", c.inputs, "Input classes to run");
    sub->add_option("--sizes", c.sizes, "llsp: MxD; others: input:n");
    sub->add_option("--dataset-path", c.dataset_path, "Directory with winequality-red.csv / cal_housing.data");
    sub->add_flag("--no-timing", c.no_timing, "Write 0 in timing columns (byte-reproducible output)");
}

BenchConfig to_config(const Common& c, long default_trials) {
    BenchConfig cfg;
    cfg.seed = c.seed;
    cfg.trials = c.trials.value_or(default_trials);
    cfg.inputs = c.inputs;
    cfg.sizes = c.sizes;
    cfg.dataset_path = c.dataset_path;
    cfg.timing = !c.no_timing;
    return cfg;
}

void emit(const CsvTable& t, const BenchConfig& cfg, const std::string& out) {
    if (out == "-") {
        t.write(std::cout, cfg);
        return;
    }
    std::ofstream f(out);
    if (!f) throw IoError("cannot write " + out);
    t.write(f, cfg);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"superfast: sketched least squares, leverage-score CUR and refinement benchmarks"};
    app.require_subcommand(1);

    Common llsp_c, cur_c, ref_c, ls_c;
    std::vector<std::string> multipliers, solvers;
    std::vector<long> hs{2, 3, 4, 5, 6};
    int asph_depth = 3;
    long block_count = 8, iters = 10;

    auto* llsp = app.add_subcommand("llsp-bench", "Sketched vs exact least-squares residual ratios");
    llsp->set_help_flag("--help", "Print this help message and exit");
    add_common(llsp, llsp_c);
    llsp->add_option("--multiplier", multipliers, "perm, blockperm, asph, gaussian");
    llsp->add_option("--h", hs, "Sketch size multiples s = d h")->capture_default_str();
    llsp->add_option("--asph-depth", asph_depth, "ASPH depth d")->capture_default_str();
    llsp->add_option("--block-count", block_count, "Identity blocks c of the block permutation")->capture_default_str();

    auto* cur = app.add_subcommand("cur-bench", "CUR error ratios for svd and uniform scores");
    add_common(cur, cur_c);

    auto* ref = app.add_subcommand("refine-bench", "Alternating refinement per-iteration metrics");
    add_common(ref, ref_c);
    ref->add_option("--solver", solvers, "leverage, gaussian_embed, exact");
    ref->add_option("--iters", iters, "Iterations T")->capture_default_str();

    auto* ls = app.add_subcommand("lscore-perturb", "Leverage scores of an LRA vs the input");
    add_common(ls, ls_c);

    std::string gen_name, gen_out = "-";
    long gen_n = 0, gen_m = 0, gen_rank = 10;
    std::uint64_t gen_seed = 1;
    auto* gen = app.add_subcommand("gen", "Write a generated matrix in the text format");
    gen->add_option("--name", gen_name, "gaussian, cauchy, single_layer, ill_conditioned, factor_gaussian, "
                                        "baart, foxgood, gravity, laplace, shaw, wing")
        ->required();
    gen->add_option("--n", gen_n, "Columns (and rows unless --m)")->required();
    gen->add_option("--m", gen_m, "Rows");
    gen->add_option("--rank", gen_rank, "Rank for factor_gaussian")->capture_default_str();
    gen->add_option("--seed", gen_seed, "RNG seed")->capture_default_str();
    gen->add_option("--out", gen_out, "Output path, - for stdout")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*llsp) {
            BenchConfig cfg = to_config(llsp_c, 100);
            cfg.multipliers = multipliers;
            cfg.hs.assign(hs.begin(), hs.end());
            cfg.asph_depth = asph_depth;
            cfg.block_count = block_count;
            emit(run_llsp_bench(cfg), cfg, llsp_c.out);
        } else if (*cur) {
            BenchConfig cfg = to_config(cur_c, 100);
            emit(run_cur_bench(cfg), cfg, cur_c.out);
        } else if (*ref) {
            BenchConfig cfg = to_config(ref_c, 10);
            cfg.solvers = solvers;
            cfg.iters = iters;
            emit(run_refine_bench(cfg), cfg, ref_c.out);
        } else if (*ls) {
            BenchConfig cfg = to_config(ls_c, 100);
            emit(run_lscore_perturb(cfg), cfg, ls_c.out);
        } else if (*gen) {
            Rng rng(gen_seed, stream_id("gen/" + gen_name));
            Mat M = generate_named(gen_name, gen_m ? gen_m : gen_n, gen_n, gen_rank, rng);
            if (gen_out == "-")
                write_matrix(std::cout, M);
            else
                write_matrix_file(gen_out, M);
        }
    } catch (const InputError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const IoError& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
