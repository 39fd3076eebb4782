#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "afc/classifier.hpp"
#include "afc/seq_io.hpp"

namespace afc {

// Assignment of every dataset row to one of n folds.
struct FoldPlan {
    std::size_t n_folds = 0;
    std::vector<std::size_t> assignments;  // fold index per row
    bool stratified = true;
    bool shuffled = false;
    std::uint64_t seed = 0;

    std::vector<std::size_t> test_rows(std::size_t fold) const;
    std::vector<std::size_t> train_rows(std::size_t fold) const;
};

// Stratified folds: within each class, members (in row order, or in a
// seeded random order when shuffled) are dealt round-robin. The starting
// fold rotates from class to class so overall fold sizes stay balanced.
// Throws ConfigError if n_folds < 2 or a class has fewer than n_folds rows.
FoldPlan make_folds(const std::vector<ClassIndex>& labels, const std::vector<std::string>& classes,
                    std::size_t n_folds, bool shuffled, std::uint64_t seed);

struct MetricRecord {
    // Support-weighted averages over classes.
    double precision = 0.0;
    double recall = 0.0;
    double f_measure = 0.0;

    std::vector<double> class_precision;
    std::vector<double> class_recall;
    std::vector<double> class_f;
    std::vector<std::size_t> support;  // true rows per class
    std::vector<std::size_t> true_positives;
    std::vector<std::size_t> false_positives;
    std::vector<std::size_t> false_negatives;
};

MetricRecord weighted_f_measure(const std::vector<ClassIndex>& truth,
                                const std::vector<ClassIndex>& predicted, std::size_t class_count);

// One (model, k, fragment length, fold) evaluation.
struct CellRecord {
    ModelConfig model;
    int k = 0;
    std::size_t fragment_length = 0;  // 0 = complete genomes
    std::size_t fold = 0;
    std::optional<MetricRecord> metrics;
    std::string error;  // set when the cell failed
    std::size_t fallback_predictions = 0;
    std::vector<std::string> test_ids;
    std::vector<ClassIndex> truth;
    std::vector<ClassIndex> predicted;
};

// Fold scores of one (model, k, fragment length) combination.
struct AggregateRecord {
    ModelConfig model;
    int k = 0;
    std::size_t fragment_length = 0;
    double f_mean = 0.0;
    double f_std = 0.0;          // sample standard deviation over folds
    double f_accumulated = 0.0;  // running sum of F / n_folds
    std::size_t n_folds = 0;     // folds that produced a score
    std::size_t failed_folds = 0;
};

struct ExperimentReport {
    std::vector<ModelConfig> models;
    int k_min = 0;
    int k_max = 0;
    std::vector<std::size_t> fragment_lengths;
    std::size_t n_folds = 0;
    std::size_t max_per_class = 0;
    std::uint64_t seed = 0;
    std::string dataset_digest;
    std::vector<std::string> classes;
    std::vector<CellRecord> cells;
    std::vector<AggregateRecord> aggregates;
    std::vector<std::string> warnings;

    // Rebuilds `aggregates` from `cells`.
    void aggregate();
};

struct EvaluationOptions {
    std::size_t n_folds = 5;
    // Defaults: unshuffled folds for complete genomes, shuffled for fragments.
    std::optional<bool> shuffle;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    // Use this plan instead of building one.
    std::optional<FoldPlan> plan;
};

// Train and test on complete genomes. One k-mer matrix per k, one fold plan
// shared by every k and model.
ExperimentReport evaluate_complete(const LabeledDataset& dataset,
                                   const std::vector<ModelConfig>& models, int k_min, int k_max,
                                   const EvaluationOptions& options);

// Train on complete genomes of the training folds, test on fragments drawn
// from the held-out genomes only. Fragments are sampled once per fold and
// reused for every k.
ExperimentReport evaluate_fragments(const LabeledDataset& dataset,
                                    const std::vector<ModelConfig>& models, int k_min, int k_max,
                                    std::size_t fragment_length, std::size_t max_per_class,
                                    const EvaluationOptions& options);

struct GridConfig {
    std::vector<ModelConfig> models;
    int k_min = 4;
    int k_max = 15;
    std::size_t n_folds = 5;
    std::vector<std::size_t> fragment_lengths{0};  // 0 = complete genomes
    std::size_t max_per_class = 1000;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
};

// Every model x k x fragment setting. Cell failures are recorded in the
// report; only invalid configurations throw.
ExperimentReport run_grid(const LabeledDataset& dataset, const GridConfig& config);

// Validates a grid against a dataset without running it.
void validate_grid(const LabeledDataset& dataset, const GridConfig& config);

// SHA-256 over ids, residues and class labels.
std::string dataset_digest(const LabeledDataset& dataset);
std::string sha256_hex(std::string_view data);

}  // namespace afc
