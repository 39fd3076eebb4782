#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "afc/evaluation.hpp"
#include "afc/seq_io.hpp"

namespace afc {

// Everything needed to reproduce an evaluation run.
struct RunConfig {
    std::filesystem::path fasta;
    std::filesystem::path labels;
    ManifestOptions manifest;
    std::string task = "classification";
    int k_min = 4;
    int k_max = 15;
    std::vector<ModelConfig> models = paper_models();
    std::size_t n_folds = 5;
    std::vector<std::size_t> fragment_lengths{0, 100, 250, 500, 1000};
    std::size_t max_per_class = 1000;
    std::uint64_t seed = 42;
    std::filesystem::path out = "results";
    std::vector<std::string> formats{"csv", "json"};
    std::size_t workers = 0;  // 0 = all cores

    // Throws ConfigError describing the first violated constraint.
    void validate() const;

    GridConfig grid() const;

    // Canonical JSON form; its SHA-256 is the config digest.
    std::string canonical_json() const;
    std::string digest() const;
};

// Reads a JSON config document. Missing keys keep their defaults. Keys for
// discriminative hyper-parameters (C, lambda, tol, grad_tol, max_iter) apply
// to every LR/LSVM model unless a model object overrides them.
RunConfig parse_run_config(std::string_view json_text, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);

// Parses "MB_MLE", "LR_L1", ... or "paper" (the 16-model set).
std::vector<ModelConfig> parse_model_list(const std::vector<std::string>& ids);

}  // namespace afc
