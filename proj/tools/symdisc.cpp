// Command-line front end: synthetic data generation, symmetry discovery,
// seed-sweep tables, and the semi-synthetic image-flip experiment.

#include "symdisc/data.hpp"
#include "symdisc/evaluate.hpp"
#include "symdisc/finetune.hpp"
#include "symdisc/groups.hpp"
#include "symdisc/ranking.hpp"
#include "symdisc/selection.hpp"
#include "symdisc/spectral.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <fstream>
#include <future>
#include <iostream>
#include <set>
#include <sstream>
#include <vector>

namespace {

using namespace symdisc;

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw format_error(path + ": cannot open for writing");
    return out;
}

DesignMatrix load_design(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw format_error(path + ": cannot open");
    return read_design_csv(in);
}

Vector signs_from_unfixed(Index dim, const std::vector<int>& unfixed) {
    Vector signs = Vector::Ones(dim);
    for (int i : unfixed) signs(i) = -1.0;
    return signs;
}

Vector signs_top_k(const RankingReport& report, int k) {
    Vector signs = Vector::Ones(static_cast<Index>(report.order.size()));
    for (int i = 0; i < k; ++i) signs(report.order[static_cast<std::size_t>(i)]) = -1.0;
    return signs;
}

struct DiscoverOptions {
    std::string input, out = "discover", truth, selection = "full-mmd", stat = "mm-mix";
    int k = 0;
    double bandwidth = 3.0;
    double alpha = -1.0;  // >= 0 switches to the weighted kernel
    int batch = 1024;
    int repeats = 5;
    int folds = 5;
    int bootstrap_m = 100;
    double alpha_sig = 0.05;
    std::uint64_t seed = 0;
    bool group = false;
    bool run_finetune = false;
    FinetuneConfig ft;
};

struct DiscoverOutput {
    SymmetryCandidate candidate;
    int k_pred = 0;
};

DiscoverOutput run_discover(const DesignMatrix& data, const DiscoverOptions& opt,
                            std::ostream* log = nullptr) {
    data.validate();
    const Matrix& X = data.values;
    SpectralModel spectral = fit_spectral(X);
    if (eigengap(spectral.eigenvalues) < 1e-9 * std::abs(spectral.eigenvalues(0)))
        std::cerr << "warning: near-degenerate eigengap; rankings may be unstable\n";

    const Statistic stat = parse_statistic(opt.stat);
    const Vector scores = compute_statistic(stat, X, spectral);
    RankingReport report = rank(scores, opt.stat);
    {
        auto out = open_out(opt.out + "_ranking.csv");
        write_ranking_csv(out, report, spectral.eigenvalues);
    }

    KernelSpec kernel = opt.alpha >= 0.0
                            ? KernelSpec::weighted(opt.bandwidth, opt.alpha, spectral.covariance)
                            : KernelSpec::spherical(opt.bandwidth);
    Rng rng(opt.seed, 1);

    Vector signs;
    int k_pred = 0;
    if (opt.selection == "known-k") {
        if (opt.k < 0 || opt.k > spectral.eigenvalues.size())
            throw std::invalid_argument("known-k selection needs 0 <= --k <= d");
        signs = signs_top_k(report, opt.k);
        k_pred = opt.k;
    } else if (opt.selection == "clt") {
        const std::vector<int> unfixed = unfixed_vectors(X, spectral, Statistic::mean);
        signs = signs_from_unfixed(X.cols(), unfixed);
        k_pred = static_cast<int>(unfixed.size());
    } else if (opt.selection == "full-mmd" || opt.selection == "kfold-mmd") {
        SelectionResult sel =
            opt.selection == "full-mmd"
                ? select_full_dataset(X, spectral, report, kernel, rng, opt.batch, opt.repeats)
                : select_kfold(X, stat, kernel, opt.folds, opt.repeats, rng, opt.batch);
        signs = sel.signs;
        k_pred = sel.swap_count;
        auto out = open_out(opt.out + "_selection.csv");
        write_selection_csv(out, sel);
    } else if (opt.selection == "bootstrap") {
        const auto rows = bootstrap_unfixed_test(X, signed_mean_statistic(), opt.bootstrap_m,
                                                 opt.alpha_sig, rng);
        signs = Vector::Ones(X.cols());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (rows[i].decision == BootstrapDecision::UNFIXED) {
                signs(static_cast<Index>(i)) = -1.0;
                ++k_pred;
            }
        auto out = open_out(opt.out + "_bootstrap.csv");
        write_bootstrap_csv(out, rows);
    } else {
        throw std::invalid_argument("unknown selection mode: " + opt.selection);
    }

    SymmetryCandidate candidate = compose_symmetry(spectral.eigenvectors, signs);

    if (opt.group) {
        GroupModel model = recover_group(X, spectral, stat);
        model.generators = generators(X, spectral, model, stat);
        auto out = open_out(opt.out + "_group.csv");
        write_group_csv(out, model);
        auto meta = open_out(opt.out + "_group.json");
        write_group_meta_json(meta, model);
    }

    if (opt.run_finetune) {
        FinetuneConfig cfg = opt.ft;
        cfg.bandwidth = opt.bandwidth;
        Rng ft_rng(opt.seed, 2);
        FinetuneTrace trace = finetune(X, signs, spectral.eigenvectors, cfg, ft_rng);
        candidate.matrix = trace.W * signs.asDiagonal() * trace.W.transpose();
        auto out = open_out(opt.out + "_trace.csv");
        write_trace_csv(out, trace);
    }

    {
        auto out = open_out(opt.out + "_symmetry.csv");
        write_matrix_csv(out, candidate.matrix);
    }

    if (!opt.truth.empty()) {
        std::ifstream in(opt.truth);
        if (!in) throw format_error(opt.truth + ": cannot open");
        const Matrix T = read_matrix_csv(in);
        // Report on the root-mean-square entry scale used by the reference
        // tables (Frobenius norm divided by d).
        const double err = ground_truth_error(candidate.matrix, T) / static_cast<double>(T.cols());
        (log ? *log : std::cout) << "ground_truth_error," << err << "\n";
    }
    return {std::move(candidate), k_pred};
}

int cmd_synth(const std::string& out, SynthConfig cfg) {
    auto [data, truth] = gumbel_mixture(cfg);
    auto data_out = open_out(out + "_data.csv");
    write_design_csv(data_out, data);
    auto truth_out = open_out(out + "_truth.csv");
    write_matrix_csv(truth_out, truth.matrix);
    return 0;
}

struct TableOptions {
    std::vector<int> dims{6, 10};
    std::vector<int> samples{2000, 10000};
    std::vector<std::string> stats{"mm-mix"};
    int seeds = 100;
    std::uint64_t seed0 = 0;
    int clusters = 2;
    int workers = 1;
    std::string out = "table";
};

EvalRecord table_cell(int d, int n, const std::string& stat_name, std::uint64_t seed, int clusters) {
    const auto t0 = std::chrono::steady_clock::now();
    SynthConfig cfg;
    cfg.dim = d;
    cfg.samples = n;
    cfg.clusters = clusters;
    cfg.seed = seed;
    cfg.planted_swaps = d / 2;
    auto [data, truth] = gumbel_mixture(cfg);

    SpectralModel spectral = fit_spectral(data.values);
    const Vector scores = compute_statistic(parse_statistic(stat_name), data.values, spectral);
    RankingReport report = rank(scores, stat_name);
    const Vector signs = signs_top_k(report, cfg.planted_swaps);
    SymmetryCandidate cand = compose_symmetry(spectral.eigenvectors, signs);

    EvalRecord rec;
    rec.seed = seed;
    rec.method = stat_name + "/known-k";
    rec.dim = d;
    rec.samples = n;
    rec.error = ground_truth_error(cand.matrix, truth.matrix) / static_cast<double>(d);
    rec.k_pred = cfg.planted_swaps;
    rec.k_true = cfg.planted_swaps;
    const auto buckets = eigenvector_buckets(spectral.eigenvectors, truth.matrix);
    std::vector<int> predicted(report.order.begin(), report.order.begin() + cfg.planted_swaps);
    try {
        rec.accuracy = selection_accuracy(buckets, predicted);
    } catch (const undefined_accuracy_error&) {
        rec.accuracy = std::numeric_limits<double>::quiet_NaN();
    }
    rec.runtime_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

int cmd_table(const TableOptions& opt) {
    std::vector<EvalRecord> records;
    std::ostringstream summary;
    summary << "method,d,N,mean_error,se_error,count\n";
    for (int d : opt.dims)
        for (int n : opt.samples)
            for (const auto& stat : opt.stats) {
                std::vector<EvalRecord> cell(static_cast<std::size_t>(opt.seeds));
                // Per-seed tasks are independent; chunk them over workers.
                const int w = std::max(1, opt.workers);
                std::vector<std::future<void>> futures;
                for (int c = 0; c < w; ++c)
                    futures.push_back(std::async(std::launch::async, [&, c] {
                        for (int s = c; s < opt.seeds; s += w)
                            cell[static_cast<std::size_t>(s)] =
                                table_cell(d, n, stat, opt.seed0 + static_cast<std::uint64_t>(s),
                                           opt.clusters);
                    }));
                for (auto& f : futures) f.get();
                double sum = 0, sum2 = 0;
                for (const auto& r : cell) {
                    sum += r.error;
                    sum2 += r.error * r.error;
                }
                const double mean = sum / opt.seeds;
                const double var = (sum2 - opt.seeds * mean * mean) / std::max(1, opt.seeds - 1);
                summary << stat << "/known-k," << d << "," << n << "," << mean << ","
                        << std::sqrt(std::max(0.0, var) / opt.seeds) << "," << opt.seeds << "\n";
                records.insert(records.end(), cell.begin(), cell.end());
            }
    auto out = open_out(opt.out + "_records.csv");
    write_records_csv(out, records);
    auto sum_out = open_out(opt.out + "_summary.csv");
    sum_out << summary.str();
    return 0;
}

struct SemisynthOptions {
    std::string images, out = "semisynth", stat = "sign";
    int side = 10;
    std::uint64_t seed = 0;
    int grid = 8;
};

int cmd_semisynth(const SemisynthOptions& opt) {
    DesignMatrix raw = idx_read(opt.images);
    const int from_side = static_cast<int>(std::lround(std::sqrt(static_cast<double>(raw.dim()))));
    DesignMatrix small = opt.side == from_side ? raw : downsample(raw, from_side, opt.side);
    Rng rng(opt.seed);
    auto [flipped, truth] = flip_augment(small, opt.side, rng);

    SpectralModel spectral = fit_spectral(flipped.values);
    const Vector scores = compute_statistic(parse_statistic(opt.stat), flipped.values, spectral);
    RankingReport report = rank(scores, opt.stat);

    // Predicted unfixed set: the smaller-statistic half of the eigenvectors
    // whose eigenvalue clears the floor.
    const double floor = kLambdaFloorFraction * spectral.eigenvalues(0);
    int nontrivial = 0;
    for (Index i = 0; i < spectral.eigenvalues.size(); ++i)
        if (spectral.eigenvalues(i) > floor) ++nontrivial;
    const int k = nontrivial / 2;
    std::vector<int> predicted(report.order.begin(), report.order.begin() + k);

    const auto buckets = eigenvector_buckets(spectral.eigenvectors, truth.matrix);
    int plus = 0, minus = 0, error = 0;
    for (auto b : buckets)
        (b == Bucket::PLUS ? plus : b == Bucket::MINUS ? minus : error)++;
    const double bucket_acc =
        static_cast<double>(plus + minus) / static_cast<double>(buckets.size());
    double sel_acc = std::numeric_limits<double>::quiet_NaN();
    try {
        sel_acc = selection_accuracy(buckets, predicted);
    } catch (const undefined_accuracy_error&) {
    }

    auto out = open_out(opt.out + "_accuracy.csv");
    out << "side,stat,k,plus,minus,error,bucket_accuracy,selection_accuracy\n"
        << opt.side << "," << opt.stat << "," << k << "," << plus << "," << minus << "," << error
        << "," << bucket_acc << "," << sel_acc << "\n";

    // Image grid: row 0 the inputs, row 1 their images under the recovered
    // transformation.
    const Vector signs = signs_top_k(report, k);
    SymmetryCandidate cand = compose_symmetry(spectral.eigenvectors, signs);
    const int n_show = std::min<int>(opt.grid, static_cast<int>(small.rows()));
    Matrix inputs = small.values.topRows(n_show);
    Matrix transformed = inputs * cand.matrix.transpose();
    Matrix grid(2 * opt.side, n_show * opt.side);
    grid.topRows(opt.side) = image_row(inputs, opt.side);
    grid.bottomRows(opt.side) = image_row(transformed, opt.side);
    write_pgm(opt.out + "_grid.pgm", grid);

    std::cout << "bucket_accuracy," << bucket_acc << "\nselection_accuracy," << sel_acc << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Discovers discrete orthogonal involutive linear symmetries from samples"};
    app.require_subcommand(1);

    // synth
    auto* synth = app.add_subcommand("synth", "Generate a planted-symmetry Gumbel mixture");
    SynthConfig synth_cfg;
    std::string synth_out = "synth";
    synth->add_option("--d", synth_cfg.dim, "dimension")->check(CLI::PositiveNumber);
    synth->add_option("--n", synth_cfg.samples, "sample count")->check(CLI::PositiveNumber);
    synth->add_option("--clusters", synth_cfg.clusters, "mixture components")
        ->check(CLI::PositiveNumber);
    synth->add_option("--swaps", synth_cfg.planted_swaps, "planted coordinate swaps");
    synth->add_option("--seed", synth_cfg.seed, "RNG seed");
    synth->add_flag("--exact-pairs", synth_cfg.exact_pairs,
                    "mirror the sampled points instead of drawing fresh ones");
    synth->add_option("--out", synth_out, "output path prefix");

    // discover
    auto* discover = app.add_subcommand("discover", "Recover a symmetry from a CSV dataset");
    DiscoverOptions dopt;
    discover->add_option("--input", dopt.input, "dataset CSV")->required();
    discover->add_option("--out", dopt.out, "output path prefix");
    discover->add_option("--truth", dopt.truth, "planted matrix CSV for error reporting");
    discover->add_option("--stat", dopt.stat,
                         "mean|median|mm-mix|sign|skew|np-skew|dskew|cov-adj");
    discover->add_option("--selection", dopt.selection,
                         "known-k|clt|full-mmd|kfold-mmd|bootstrap");
    discover->add_option("--k", dopt.k, "swap count for known-k selection");
    discover->add_option("--h", dopt.bandwidth, "kernel bandwidth")->check(CLI::PositiveNumber);
    discover->add_option("--alpha", dopt.alpha,
                         "weighted-kernel regularization in [0,1]; omit for spherical");
    discover->add_option("--batch", dopt.batch, "MMD batch size")->check(CLI::PositiveNumber);
    discover->add_option("--repeats", dopt.repeats, "MMD repeats / k-fold repetitions")
        ->check(CLI::PositiveNumber);
    discover->add_option("--folds", dopt.folds, "folds for kfold-mmd")->check(CLI::PositiveNumber);
    discover->add_option("--bootstrap-m", dopt.bootstrap_m, "bootstrap resample count");
    discover->add_option("--alpha-sig", dopt.alpha_sig, "bootstrap significance level");
    discover->add_option("--seed", dopt.seed, "RNG seed");
    discover->add_flag("--group", dopt.group, "also run (Z/2Z)^n group recovery");
    discover->add_flag("--finetune", dopt.run_finetune, "MMD fine-tuning of the eigenbasis");
    discover->add_option("--epochs", dopt.ft.epochs, "finetune epochs");
    discover->add_option("--lr", dopt.ft.learning_rate, "finetune learning rate");
    discover->add_option("--momentum", dopt.ft.momentum, "finetune momentum");
    discover->add_option("--ortho", dopt.ft.ortho_penalty_weight, "orthogonality penalty weight");

    // table
    auto* table = app.add_subcommand("table", "Seed-sweep error table over (d, N, statistic)");
    TableOptions topt;
    table->add_option("--d", topt.dims, "dimensions");
    table->add_option("--n", topt.samples, "sample counts");
    table->add_option("--stat", topt.stats, "statistics to sweep");
    table->add_option("--seeds", topt.seeds, "seeds per cell")->check(CLI::PositiveNumber);
    table->add_option("--seed0", topt.seed0, "first seed");
    table->add_option("--clusters", topt.clusters, "mixture components");
    table->add_option("--workers", topt.workers, "worker threads")->check(CLI::PositiveNumber);
    table->add_option("--out", topt.out, "output path prefix");

    // semisynth
    auto* semi = app.add_subcommand("semisynth", "Image flip experiment on an IDX dataset");
    SemisynthOptions sopt;
    semi->add_option("--images", sopt.images, "IDX image file")->required();
    semi->add_option("--side", sopt.side, "downsampled image side")->check(CLI::PositiveNumber);
    semi->add_option("--stat", sopt.stat, "ranking statistic");
    semi->add_option("--seed", sopt.seed, "RNG seed");
    semi->add_option("--grid", sopt.grid, "images per grid row");
    semi->add_option("--out", sopt.out, "output path prefix");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (*synth) {
            if (synth_cfg.samples % synth_cfg.clusters != 0) {
                std::cerr << "error: --n must be divisible by --clusters\n";
                return 2;
            }
            if (synth_cfg.samples % 2 != 0) {
                std::cerr << "error: --n must be even (half the sample is the mirrored image)\n";
                return 2;
            }
            if (2 * synth_cfg.planted_swaps > synth_cfg.dim || synth_cfg.planted_swaps < 0) {
                std::cerr << "error: need 0 <= 2*--swaps <= --d\n";
                return 2;
            }
            return cmd_synth(synth_out, synth_cfg);
        }
        if (*discover) {
            run_discover(load_design(dopt.input), dopt);
            return 0;
        }
        if (*table) return cmd_table(topt);
        if (*semi) return cmd_semisynth(sopt);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
