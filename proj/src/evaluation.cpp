#include "afc/evaluation.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <numeric>
#include <tuple>

#include "afc/error.hpp"
#include "afc/parallel.hpp"
#include "afc/random.hpp"

namespace afc {

std::vector<std::size_t> FoldPlan::test_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r) {
        if (assignments[r] == fold) rows.push_back(r);
    }
    return rows;
}

std::vector<std::size_t> FoldPlan::train_rows(std::size_t fold) const {
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < assignments.size(); ++r) {
        if (assignments[r] != fold) rows.push_back(r);
    }
    return rows;
}

FoldPlan make_folds(const std::vector<ClassIndex>& labels, const std::vector<std::string>& classes,
                    std::size_t n_folds, bool shuffled, std::uint64_t seed) {
    if (n_folds < 2) throw ConfigError("cross-validation needs at least 2 folds");
    std::vector<std::vector<std::size_t>> members(classes.size());
    for (std::size_t r = 0; r < labels.size(); ++r) members.at(labels[r]).push_back(r);
    for (std::size_t c = 0; c < members.size(); ++c) {
        if (members[c].size() < n_folds) {
            throw ConfigError("class '" + classes[c] + "' has only " +
                              std::to_string(members[c].size()) + " sequences, fewer than " +
                              std::to_string(n_folds) + " folds; use " +
                              std::to_string(members[c].size()) +
                              " folds or fewer so every training split holds the class");
        }
    }

    FoldPlan plan;
    plan.n_folds = n_folds;
    plan.assignments.assign(labels.size(), 0);
    plan.shuffled = shuffled;
    plan.seed = seed;
    std::size_t start = 0;
    for (std::size_t c = 0; c < members.size(); ++c) {
        auto& rows = members[c];
        if (shuffled) {
            Rng rng(derive_seed(seed, c));
            rng.shuffle(std::span<std::size_t>(rows));
        }
        for (std::size_t j = 0; j < rows.size(); ++j) {
            plan.assignments[rows[j]] = (start + j) % n_folds;
        }
        start = (start + rows.size()) % n_folds;
    }
    return plan;
}

MetricRecord weighted_f_measure(const std::vector<ClassIndex>& truth,
                                const std::vector<ClassIndex>& predicted, std::size_t class_count) {
    if (truth.size() != predicted.size()) {
        throw ConfigError("true and predicted label lists differ in length");
    }
    MetricRecord m;
    m.true_positives.assign(class_count, 0);
    m.false_positives.assign(class_count, 0);
    m.false_negatives.assign(class_count, 0);
    m.support.assign(class_count, 0);
    for (std::size_t i = 0; i < truth.size(); ++i) {
        if (truth[i] >= class_count || predicted[i] >= class_count) {
            throw ConfigError("label index outside the class set");
        }
        ++m.support[truth[i]];
        if (truth[i] == predicted[i]) {
            ++m.true_positives[truth[i]];
        } else {
            ++m.false_negatives[truth[i]];
            ++m.false_positives[predicted[i]];
        }
    }

    m.class_precision.assign(class_count, 0.0);
    m.class_recall.assign(class_count, 0.0);
    m.class_f.assign(class_count, 0.0);
    double total_support = 0.0;
    for (std::size_t c = 0; c < class_count; ++c) {
        const auto tp = static_cast<double>(m.true_positives[c]);
        const auto predicted_c = tp + static_cast<double>(m.false_positives[c]);
        const auto actual_c = tp + static_cast<double>(m.false_negatives[c]);
        const double p = predicted_c > 0 ? tp / predicted_c : 0.0;
        const double r = actual_c > 0 ? tp / actual_c : 0.0;
        m.class_precision[c] = p;
        m.class_recall[c] = r;
        m.class_f[c] = (r + p) > 0 ? 2.0 * r * p / (r + p) : 0.0;

        const auto w = static_cast<double>(m.support[c]);
        m.precision += w * p;
        m.recall += w * r;
        m.f_measure += w * m.class_f[c];
        total_support += w;
    }
    if (total_support > 0) {
        m.precision /= total_support;
        m.recall /= total_support;
        m.f_measure /= total_support;
    }
    return m;
}

void ExperimentReport::aggregate() {
    aggregates.clear();
    // Cells are grouped by (fragment, model, k) in the order they appear.
    std::vector<std::tuple<std::size_t, std::string, int>> order;
    std::map<std::tuple<std::size_t, std::string, int>, std::vector<const CellRecord*>> groups;
    for (const auto& cell : cells) {
        const auto key = std::make_tuple(cell.fragment_length, cell.model.id(), cell.k);
        auto& group = groups[key];
        if (group.empty()) order.push_back(key);
        group.push_back(&cell);
    }
    for (const auto& key : order) {
        const auto& group = groups[key];
        AggregateRecord agg;
        agg.model = group.front()->model;
        agg.k = group.front()->k;
        agg.fragment_length = group.front()->fragment_length;
        std::vector<double> scores;
        for (const CellRecord* cell : group) {
            if (cell->metrics) {
                scores.push_back(cell->metrics->f_measure);
            } else {
                ++agg.failed_folds;
            }
        }
        agg.n_folds = scores.size();
        for (double f : scores) agg.f_accumulated += f / static_cast<double>(group.size());
        if (!scores.empty()) {
            agg.f_mean = std::accumulate(scores.begin(), scores.end(), 0.0) /
                         static_cast<double>(scores.size());
        }
        if (scores.size() > 1) {
            double ss = 0.0;
            for (double f : scores) ss += (f - agg.f_mean) * (f - agg.f_mean);
            agg.f_std = std::sqrt(ss / static_cast<double>(scores.size() - 1));
        }
        aggregates.push_back(agg);
    }
}

namespace {

void check_k_range(int k_min, int k_max, const std::vector<ModelConfig>& models) {
    if (k_min > k_max) throw ConfigError("k_min must not exceed k_max");
    static_cast<void>(KmerSpec(k_min));  // range checks
    static_cast<void>(KmerSpec(k_max));
    const bool markov = std::any_of(models.begin(), models.end(),
                                    [](const ModelConfig& m) { return m.needs_pairs(); });
    if (markov && k_min < 2) throw ConfigError("Markov chain models need k >= 2");
    if (models.empty()) throw ConfigError("no models to evaluate");
}

bool any_markov(const std::vector<ModelConfig>& models) {
    return std::any_of(models.begin(), models.end(),
                       [](const ModelConfig& m) { return m.needs_pairs(); });
}

FoldPlan plan_for(const LabeledDataset& dataset, const EvaluationOptions& options,
                  bool default_shuffle) {
    if (options.plan) {
        if (options.plan->assignments.size() != dataset.size()) {
            throw ConfigError("supplied fold plan does not cover the dataset");
        }
        return *options.plan;
    }
    return make_folds(dataset.labels, dataset.classes, options.n_folds,
                      options.shuffle.value_or(default_shuffle), options.seed);
}

ExperimentReport empty_report(const LabeledDataset& dataset, const std::vector<ModelConfig>& models,
                              int k_min, int k_max, const FoldPlan& plan, std::uint64_t seed) {
    ExperimentReport report;
    report.models = models;
    report.k_min = k_min;
    report.k_max = k_max;
    report.n_folds = plan.n_folds;
    report.seed = seed;
    report.dataset_digest = dataset_digest(dataset);
    report.classes = dataset.classes;
    return report;
}

// Fits every model on `train`, scores `test`, and writes one cell per model.
void run_models(const std::vector<ModelConfig>& models, const ProfileMatrix* train,
                const ProfileMatrix* test, const std::string& setup_error, int k,
                std::size_t fragment_length, std::size_t fold, std::size_t workers,
                std::vector<CellRecord>& slots) {
    parallel_for(models.size(), workers, [&](std::size_t m) {
        CellRecord& cell = slots[m];
        cell.model = models[m];
        cell.k = k;
        cell.fragment_length = fragment_length;
        cell.fold = fold;
        if (!setup_error.empty()) {
            cell.error = setup_error;
            return;
        }
        try {
            const TrainedModel model = fit_model(models[m], *train);
            const auto predictions = predict(model, *test);
            cell.test_ids = test->ids;
            cell.truth = test->labels;
            cell.predicted.reserve(predictions.size());
            for (const auto& p : predictions) {
                cell.predicted.push_back(p.label);
                if (p.fallback) ++cell.fallback_predictions;
            }
            cell.metrics = weighted_f_measure(cell.truth, cell.predicted, test->classes.size());
        } catch (const std::exception& e) {
            cell.error = e.what();
        }
    });
}

// Reorders cells as (model, k, fold) for stable output.
void sort_cells(std::vector<CellRecord>& cells, const std::vector<ModelConfig>& models) {
    std::map<std::string, std::size_t> rank;
    for (std::size_t i = 0; i < models.size(); ++i) rank.emplace(models[i].id(), i);
    std::stable_sort(cells.begin(), cells.end(), [&](const CellRecord& a, const CellRecord& b) {
        return std::make_tuple(rank[a.model.id()], a.k, a.fold) <
               std::make_tuple(rank[b.model.id()], b.k, b.fold);
    });
}

}  // namespace

ExperimentReport evaluate_complete(const LabeledDataset& dataset,
                                   const std::vector<ModelConfig>& models, int k_min, int k_max,
                                   const EvaluationOptions& options) {
    check_k_range(k_min, k_max, models);
    const FoldPlan plan = plan_for(dataset, options, false);
    ExperimentReport report = empty_report(dataset, models, k_min, k_max, plan, options.seed);
    report.fragment_lengths = {0};
    const bool paired = any_markov(models);

    for (int k = k_min; k <= k_max; ++k) {
        std::optional<ProfileMatrix> matrix;
        std::string setup_error;
        try {
            matrix = build_matrix(dataset, KmerSpec(k), paired, options.workers);
        } catch (const std::exception& e) {
            setup_error = e.what();
        }
        for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
            std::vector<CellRecord> slots(models.size());
            std::optional<ProfileMatrix> train, test;
            if (matrix) {
                train = matrix->subset(plan.train_rows(fold));
                test = matrix->subset(plan.test_rows(fold));
            }
            run_models(models, train ? &*train : nullptr, test ? &*test : nullptr, setup_error, k,
                       0, fold, options.workers, slots);
            std::move(slots.begin(), slots.end(), std::back_inserter(report.cells));
        }
    }
    sort_cells(report.cells, models);
    report.aggregate();
    return report;
}

ExperimentReport evaluate_fragments(const LabeledDataset& dataset,
                                    const std::vector<ModelConfig>& models, int k_min, int k_max,
                                    std::size_t fragment_length, std::size_t max_per_class,
                                    const EvaluationOptions& options) {
    check_k_range(k_min, k_max, models);
    if (fragment_length < static_cast<std::size_t>(k_max)) {
        throw ConfigError("fragment length " + std::to_string(fragment_length) +
                          " is shorter than k_max=" + std::to_string(k_max));
    }
    const FoldPlan plan = plan_for(dataset, options, true);
    ExperimentReport report = empty_report(dataset, models, k_min, k_max, plan, options.seed);
    report.fragment_lengths = {fragment_length};
    report.max_per_class = max_per_class;
    const bool paired = any_markov(models);

    std::vector<FragmentSample> samples;
    for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
        const std::uint64_t fold_seed = derive_seed(derive_seed(options.seed, fragment_length), fold);
        samples.push_back(
            sample_fragments(dataset, fragment_length, max_per_class, fold_seed, plan.test_rows(fold)));
        for (const auto& w : samples.back().warnings) {
            report.warnings.push_back("fold " + std::to_string(fold) + ": " + w);
        }
    }

    for (int k = k_min; k <= k_max; ++k) {
        const KmerSpec spec(k);
        std::optional<ProfileMatrix> genomes;
        std::string genome_error;
        try {
            genomes = build_matrix(dataset, spec, paired, options.workers);
        } catch (const std::exception& e) {
            genome_error = e.what();
        }
        for (std::size_t fold = 0; fold < plan.n_folds; ++fold) {
            std::vector<CellRecord> slots(models.size());
            std::optional<ProfileMatrix> train, test;
            std::string setup_error = genome_error;
            if (genomes) {
                try {
                    train = genomes->subset(plan.train_rows(fold));
                    if (samples[fold].fragments.empty()) {
                        throw ConfigError("no fragments of " + std::to_string(fragment_length) +
                                          " nt could be drawn from the test fold");
                    }
                    test = build_matrix(samples[fold].fragments, dataset.classes, spec, paired,
                                        options.workers);
                } catch (const std::exception& e) {
                    setup_error = e.what();
                }
            }
            run_models(models, train ? &*train : nullptr, test ? &*test : nullptr, setup_error, k,
                       fragment_length, fold, options.workers, slots);
            std::move(slots.begin(), slots.end(), std::back_inserter(report.cells));
        }
    }
    sort_cells(report.cells, models);
    report.aggregate();
    return report;
}

void validate_grid(const LabeledDataset& dataset, const GridConfig& config) {
    check_k_range(config.k_min, config.k_max, config.models);
    if (config.max_per_class < 1) throw ConfigError("max_per_class must be at least 1");
    if (config.fragment_lengths.empty()) throw ConfigError("no fragment settings given");
    for (std::size_t len : config.fragment_lengths) {
        if (len != 0 && len < static_cast<std::size_t>(config.k_max)) {
            throw ConfigError("fragment length " + std::to_string(len) +
                              " is shorter than k_max=" + std::to_string(config.k_max));
        }
    }
    make_folds(dataset.labels, dataset.classes, config.n_folds, false, config.seed);
}

ExperimentReport run_grid(const LabeledDataset& dataset, const GridConfig& config) {
    validate_grid(dataset, config);
    EvaluationOptions options;
    options.n_folds = config.n_folds;
    options.seed = config.seed;
    options.workers = config.workers;

    ExperimentReport report;
    bool first = true;
    for (std::size_t len : config.fragment_lengths) {
        ExperimentReport part =
            len == 0 ? evaluate_complete(dataset, config.models, config.k_min, config.k_max, options)
                     : evaluate_fragments(dataset, config.models, config.k_min, config.k_max, len,
                                          config.max_per_class, options);
        if (first) {
            report = std::move(part);
            first = false;
            continue;
        }
        report.fragment_lengths.push_back(len);
        std::move(part.cells.begin(), part.cells.end(), std::back_inserter(report.cells));
        std::move(part.warnings.begin(), part.warnings.end(), std::back_inserter(report.warnings));
    }
    report.max_per_class = config.max_per_class;
    report.aggregate();
    return report;
}

std::string sha256_hex(std::string_view data) {
    std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int length = 0;
    if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
        EVP_DigestUpdate(ctx.get(), data.data(), data.size()) != 1 ||
        EVP_DigestFinal_ex(ctx.get(), digest, &length) != 1) {
        throw Error("SHA-256 computation failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    for (unsigned int i = 0; i < length; ++i) {
        out.push_back(kHex[digest[i] >> 4]);
        out.push_back(kHex[digest[i] & 15]);
    }
    return out;
}

std::string dataset_digest(const LabeledDataset& dataset) {
    std::string buffer;
    for (std::size_t i = 0; i < dataset.size(); ++i) {
        buffer += dataset.sequences[i].id;
        buffer += '\t';
        buffer += dataset.classes.at(dataset.labels[i]);
        buffer += '\t';
        buffer += dataset.sequences[i].residues;
        buffer += '\n';
    }
    return sha256_hex(buffer);
}

}  // namespace afc
