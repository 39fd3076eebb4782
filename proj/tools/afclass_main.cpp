// afclass: alignment-free k-mer classification of nucleotide sequences.
//
// Exit codes: 0 success, 1 runtime or model failure, 2 usage, input or
// configuration failure.

#include <fmt/format.h>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "afc/classifier.hpp"
#include "afc/error.hpp"
#include "afc/evaluation.hpp"
#include "afc/kmer_features.hpp"
#include "afc/report.hpp"
#include "afc/run_config.hpp"
#include "afc/seq_io.hpp"
#include "afc/serialize.hpp"
#include "afc/version.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

// Thrown for failures that map to exit code 1.
struct RuntimeFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DatasetArgs {
    std::string fasta;
    std::string labels;
    std::string delimiter = "\t";
    bool labels_header = false;
    bool strict = false;
};

afc::ManifestOptions manifest_options(const DatasetArgs& args) {
    if (args.delimiter.size() != 1) throw afc::ConfigError("--delimiter must be one character");
    return afc::ManifestOptions{args.delimiter[0], args.labels_header, args.strict};
}

afc::LabeledDataset load_dataset(const std::string& fasta, const std::string& labels,
                                 const afc::ManifestOptions& options) {
    auto dataset = afc::load_labels(fs::path(labels), afc::parse_fasta(fs::path(fasta)), options);
    for (const auto& w : dataset.warnings) std::cerr << "warning: " << w << '\n';
    return dataset;
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw afc::InputError("cannot write '" + path.string() + "'");
    return out;
}

// ---------------------------------------------------------------- profile

struct ProfileArgs {
    std::string fasta;
    int k = 0;
    std::string out;
};

int cmd_profile(const ProfileArgs& args) {
    const afc::KmerSpec spec(args.k);
    const auto sequences = afc::parse_fasta(fs::path(args.fasta));
    std::ofstream file;
    if (!args.out.empty()) file = open_output(args.out);
    std::ostream& out = args.out.empty() ? std::cout : file;
    for (const auto& seq : sequences) {
        afc::write_profile_line(out, seq.id, afc::build_profile(seq.residues, spec));
    }
    return kExitOk;
}

// ------------------------------------------------------------------ train

struct TrainArgs {
    DatasetArgs data;
    std::string config;
    std::string model = "MB";
    std::string alpha;
    std::string penalty;
    int k = 0;
    double cost = 1.0;
    double lambda = 1.0;
    double tol = 1e-4;
    double grad_tol = 1e-3;
    int max_iter = 1000;
    std::string solver = "newton";
    std::string out;
    std::size_t workers = 0;
};

afc::ModelConfig model_from_args(const TrainArgs& args) {
    afc::ModelConfig config = afc::ModelConfig::parse(args.model);
    if (!args.alpha.empty()) {
        if (!config.generative()) throw afc::ConfigError("--alpha applies to MB and Markov models");
        if (args.alpha == "MLE" || args.alpha == "mle") {
            config.policy = afc::SmoothingPolicy::mle();
        } else {
            config.policy = afc::SmoothingPolicy::bayesian(std::stod(args.alpha));
        }
    }
    if (!args.penalty.empty()) {
        if (config.generative()) throw afc::ConfigError("--penalty applies to LR and LSVM models");
        if (args.penalty != "L1" && args.penalty != "L2") {
            throw afc::ConfigError("--penalty must be L1 or L2");
        }
        config.penalty.kind = args.penalty == "L1" ? afc::Penalty::Kind::L1 : afc::Penalty::Kind::L2;
    }
    config.penalty.cost = args.cost;
    config.penalty.lambda = args.lambda;
    config.solver.tol = args.tol;
    config.solver.grad_tol = args.grad_tol;
    config.solver.max_iter = args.max_iter;
    config.solver.method = afc::parse_solver(args.solver);
    return config;
}

int cmd_train(TrainArgs args) {
    afc::ManifestOptions manifest = manifest_options(args.data);
    if (!args.config.empty()) {
        const auto run = afc::load_run_config(args.config);
        if (args.data.fasta.empty()) args.data.fasta = run.fasta.string();
        if (args.data.labels.empty()) args.data.labels = run.labels.string();
        manifest = run.manifest;
    }
    if (args.data.fasta.empty() || args.data.labels.empty()) {
        throw afc::ConfigError("train needs --fasta and --labels (or --config)");
    }
    if (args.out.empty()) throw afc::ConfigError("train needs --out for the model file");
    const afc::ModelConfig config = model_from_args(args);
    const afc::KmerSpec spec(args.k);
    const auto dataset = load_dataset(args.data.fasta, args.data.labels, manifest);

    afc::ProfileMatrix matrix;
    try {
        matrix = afc::build_matrix(dataset, spec, config.needs_pairs(), args.workers);
    } catch (const afc::ShortSequenceError& e) {
        throw RuntimeFailure(e.what());
    }
    afc::TrainedModel model;
    try {
        model = afc::fit_model(config, matrix, args.workers);
    } catch (const afc::FitError& e) {
        throw RuntimeFailure(std::string("training failed: ") + e.what());
    }
    afc::save_model(args.out, model);

    std::cout << "model      " << config.id() << " (k=" << spec.k() << ")\n";
    std::cout << "sequences  " << dataset.size() << '\n';
    std::cout << "classes    " << dataset.class_count() << ':';
    for (const auto& c : dataset.classes) std::cout << ' ' << c;
    std::cout << '\n';
    if (const auto* ovr = std::get_if<afc::OneVsRestModel>(&model)) {
        std::cout << "features   " << ovr->features.size() << '\n';
        bool all_converged = true;
        for (std::size_t c = 0; c < ovr->models.size(); ++c) {
            const auto& b = ovr->models[c];
            all_converged = all_converged && b.converged;
            std::cout << fmt::format("  {:<12} converged={} iterations={} nonzero={} objective={:.6g}\n",
                                     ovr->classes[c], b.converged, b.iterations, b.nonzeros(),
                                     b.objective);
        }
        std::cout << "converged  " << (all_converged ? "true" : "false") << '\n';
    } else {
        std::size_t words = 0;
        if (const auto* mb = std::get_if<afc::MultinomialBayesModel>(&model)) {
            for (const auto& d : mb->densities) words += d.words.size();
        } else {
            for (const auto& d : std::get<afc::MarkovChainModel>(model).upper) words += d.words.size();
        }
        std::cout << "features   " << words << " (class, word) pairs seen\n";
    }
    std::cout << "written    " << args.out << '\n';
    return kExitOk;
}

// ---------------------------------------------------------------- predict

struct PredictArgs {
    std::string model_file;
    std::string fasta;
    std::string out;
    bool scores = false;
    bool lenient = false;
};

int cmd_predict(const PredictArgs& args) {
    const afc::TrainedModel model = afc::load_model(args.model_file);
    const auto sequences = afc::parse_fasta(fs::path(args.fasta), /*allow_empty=*/true);
    const afc::KmerSpec spec = afc::model_spec(model);
    const auto& classes = afc::model_classes(model);
    const bool paired = afc::model_needs_pairs(model);

    std::ofstream file;
    if (!args.out.empty()) file = open_output(args.out);
    std::ostream& out = args.out.empty() ? std::cout : file;

    std::size_t failures = 0;
    for (const auto& seq : sequences) {
        afc::ProfileMatrix row;
        row.spec = spec;
        row.classes = classes;
        row.ids = {seq.id};
        row.labels = {0};
        try {
            if (paired) {
                auto pair = afc::build_paired_profile(seq.residues, spec);
                row.rows.push_back(std::move(pair.upper));
                row.lower.push_back(std::move(pair.lower));
            } else {
                row.rows.push_back(afc::build_profile(seq.residues, spec));
            }
        } catch (const afc::ShortSequenceError& e) {
            ++failures;
            out << seq.id << "\tNA\n";
            std::cerr << (args.lenient ? "warning: " : "error: ") << seq.id << ": " << e.what() << '\n';
            continue;
        }
        const auto prediction = afc::predict(model, row).front();
        out << seq.id << '\t' << classes[prediction.label];
        if (args.scores) {
            for (double s : afc::score_row(model, row, 0)) out << '\t' << fmt::format("{}", s);
        }
        out << '\n';
        if (prediction.fallback) {
            std::cerr << "note: " << seq.id
                      << ": every class scored -inf; predicted the most frequent class\n";
        }
    }
    if (failures > 0 && !args.lenient) {
        throw RuntimeFailure(std::to_string(failures) + " sequence(s) could not be scored");
    }
    return kExitOk;
}

// --------------------------------------------------------------- evaluate

struct EvaluateArgs {
    std::string config;
    DatasetArgs data;
    std::string k;
    std::vector<std::string> models;
    std::size_t folds = 0;
    std::string fragment_lengths;
    std::size_t max_per_class = 0;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::vector<std::string> formats;
    std::optional<std::size_t> workers;
};

std::pair<int, int> parse_k_range(const std::string& text) {
    try {
        const auto dash = text.find('-');
        if (dash == std::string::npos) {
            const int k = std::stoi(text);
            return {k, k};
        }
        return {std::stoi(text.substr(0, dash)), std::stoi(text.substr(dash + 1))};
    } catch (const std::exception&) {
        throw afc::ConfigError("--k expects N or MIN-MAX, got '" + text + "'");
    }
}

std::vector<std::size_t> parse_lengths(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        if (item == "complete") {
            out.push_back(0);
            continue;
        }
        try {
            out.push_back(static_cast<std::size_t>(std::stoul(item)));
        } catch (const std::exception&) {
            throw afc::ConfigError("--fragment-lengths expects a comma list of integers");
        }
    }
    return out;
}

int cmd_evaluate(const EvaluateArgs& args) {
    afc::RunConfig config;
    if (!args.config.empty()) config = afc::load_run_config(args.config);
    if (!args.data.fasta.empty()) config.fasta = args.data.fasta;
    if (!args.data.labels.empty()) config.labels = args.data.labels;
    if (!args.data.labels.empty() || args.config.empty()) config.manifest = manifest_options(args.data);
    if (!args.k.empty()) std::tie(config.k_min, config.k_max) = parse_k_range(args.k);
    if (!args.models.empty()) config.models = afc::parse_model_list(args.models);
    if (args.folds != 0) config.n_folds = args.folds;
    if (!args.fragment_lengths.empty()) config.fragment_lengths = parse_lengths(args.fragment_lengths);
    if (args.max_per_class != 0) config.max_per_class = args.max_per_class;
    if (args.seed) config.seed = *args.seed;
    if (!args.out.empty()) config.out = args.out;
    if (!args.formats.empty()) config.formats = args.formats;
    if (args.workers) config.workers = *args.workers;
    config.validate();

    const auto dataset = load_dataset(config.fasta.string(), config.labels.string(), config.manifest);
    const afc::GridConfig grid = config.grid();
    afc::validate_grid(dataset, grid);

    std::cerr << fmt::format("evaluating {} models x k {}-{} x {} fragment setting(s), {} folds\n",
                             grid.models.size(), grid.k_min, grid.k_max,
                             grid.fragment_lengths.size(), grid.n_folds);
    const afc::ExperimentReport report = afc::run_grid(dataset, grid);

    fs::create_directories(config.out);
    auto wants = [&](const std::string& f) {
        return std::find(config.formats.begin(), config.formats.end(), f) != config.formats.end();
    };
    if (wants("csv")) {
        auto folds = open_output(config.out / "folds.csv");
        afc::write_fold_csv(folds, report);
        auto aggregate = open_output(config.out / "aggregate.csv");
        afc::write_aggregate_csv(aggregate, report);
    }
    if (wants("json")) {
        auto json = open_output(config.out / "report.json");
        json << afc::report_json(report);
    }
    if (wants("svg")) {
        for (std::size_t len : report.fragment_lengths) {
            const std::string name =
                len == 0 ? std::string("f_mean_complete.svg") : fmt::format("f_mean_{}bp.svg", len);
            auto svg = open_output(config.out / name);
            afc::write_svg(svg, report, len);
        }
    }
    {
        nlohmann::json meta = {{"software", "afclass"},
                               {"version", afc::kVersion},
                               {"config_digest", config.digest()},
                               {"dataset_digest", report.dataset_digest},
                               {"seed", config.seed},
                               {"config", nlohmann::json::parse(config.canonical_json())}};
        auto out = open_output(config.out / "run_meta.json");
        out << meta.dump(1) << '\n';
    }

    for (const auto& w : report.warnings) std::cerr << "warning: " << w << '\n';
    std::size_t failed = 0;
    for (const auto& cell : report.cells) failed += cell.metrics ? 0 : 1;
    if (failed > 0) std::cerr << "note: " << failed << " cell(s) recorded errors; see the reports\n";

    std::cout << "task: " << config.task << '\n';
    afc::write_best_table(std::cout, afc::best_and_worst(report));
    std::cout << "reports written to " << config.out.string() << '\n';
    return kExitOk;
}

void add_dataset_options(CLI::App* cmd, DatasetArgs& data) {
    cmd->add_option("--fasta", data.fasta, "FASTA file of sequences");
    cmd->add_option("--labels", data.labels, "label manifest: id<delim>class per line");
    cmd->add_option("--delimiter", data.delimiter, "manifest column delimiter (default TAB)");
    cmd->add_flag("--labels-header", data.labels_header, "manifest starts with a header row");
    cmd->add_flag("--strict", data.strict, "reject manifest ids without a sequence");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Alignment-free k-mer classification of nucleotide sequences"};
    app.set_version_flag("--version", afc::kVersion);
    app.require_subcommand(1);

    ProfileArgs profile_args;
    auto* profile = app.add_subcommand("profile", "write sparse k-mer count profiles");
    profile->add_option("--fasta", profile_args.fasta, "FASTA file")->required();
    profile->add_option("--k", profile_args.k, "k-mer length")->required();
    profile->add_option("--out", profile_args.out, "output file (default stdout)");

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "fit one classifier and save it");
    add_dataset_options(train, train_args.data);
    train->add_option("--config", train_args.config, "JSON run config supplying dataset paths");
    train->add_option("--model", train_args.model, "MB, Markov, LR, LSVM or a full id such as MB_a1e-05");
    train->add_option("--alpha", train_args.alpha, "smoothing value, or MLE");
    train->add_option("--penalty", train_args.penalty, "L1 or L2");
    train->add_option("--k", train_args.k, "k-mer length")->required();
    train->add_option("--C", train_args.cost, "loss cost C");
    train->add_option("--lambda", train_args.lambda, "regularization rate");
    train->add_option("--tol", train_args.tol, "relative objective tolerance");
    train->add_option("--grad-tol", train_args.grad_tol, "stationarity tolerance");
    train->add_option("--max-iter", train_args.max_iter, "solver iteration cap");
    train->add_option("--solver", train_args.solver, "newton (default) or proximal");
    train->add_option("--out", train_args.out, "model file to write")->required();
    train->add_option("--workers", train_args.workers, "threads (0 = all cores)");

    PredictArgs predict_args;
    auto* predict = app.add_subcommand("predict", "classify sequences with a saved model");
    predict->add_option("--model-file", predict_args.model_file, "model written by train")->required();
    predict->add_option("--fasta", predict_args.fasta, "FASTA file")->required();
    predict->add_option("--out", predict_args.out, "output file (default stdout)");
    predict->add_flag("--scores", predict_args.scores, "append per-class scores");
    predict->add_flag("--lenient", predict_args.lenient, "exit 0 even if some sequences fail");

    EvaluateArgs eval_args;
    std::uint64_t seed = 0;
    std::size_t workers = 0;
    auto* evaluate = app.add_subcommand("evaluate", "cross-validate a model grid");
    evaluate->add_option("--config", eval_args.config, "JSON run config");
    add_dataset_options(evaluate, eval_args.data);
    evaluate->add_option("--k", eval_args.k, "k or k_min-k_max");
    evaluate->add_option("--model", eval_args.models, "model ids (repeatable), or 'paper'");
    evaluate->add_option("--folds", eval_args.folds, "number of folds");
    evaluate->add_option("--fragment-lengths", eval_args.fragment_lengths,
                         "comma list; 0 or 'complete' for whole genomes");
    evaluate->add_option("--max-per-class", eval_args.max_per_class, "fragments per class and fold");
    auto* seed_opt = evaluate->add_option("--seed", seed, "random seed");
    evaluate->add_option("--out", eval_args.out, "output directory");
    evaluate->add_option("--format", eval_args.formats, "csv, json or svg (repeatable)");
    auto* workers_opt = evaluate->add_option("--workers", workers, "threads (0 = all cores)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (seed_opt->count() > 0) eval_args.seed = seed;
    if (workers_opt->count() > 0) eval_args.workers = workers;

    try {
        if (*profile) return cmd_profile(profile_args);
        if (*train) return cmd_train(train_args);
        if (*predict) return cmd_predict(predict_args);
        if (*evaluate) return cmd_evaluate(eval_args);
    } catch (const afc::ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const afc::InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const RuntimeFailure& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}
