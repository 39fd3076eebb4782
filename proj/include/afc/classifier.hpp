#pragma once

#include <cstddef>
#include <string>
#include <variant>
#include <vector>

#include "afc/discriminative.hpp"
#include "afc/generative.hpp"

namespace afc {

enum class ModelFamily { MultinomialBayes, Markov, LogisticRegression, LinearSvm };

// One classifier with its hyper-parameters; a row of the model grid.
struct ModelConfig {
    ModelFamily family = ModelFamily::MultinomialBayes;
    SmoothingPolicy policy;  // generative families
    Penalty penalty;         // discriminative families
    SolverOptions solver;

    bool generative() const noexcept {
        return family == ModelFamily::MultinomialBayes || family == ModelFamily::Markov;
    }
    bool needs_pairs() const noexcept { return family == ModelFamily::Markov; }
    Loss loss() const noexcept {
        return family == ModelFamily::LinearSvm ? Loss::SquaredHinge : Loss::Logistic;
    }

    // "MB_MLE", "MB_a1e-05", "Markov_a1", "LR_L1", "LSVM_L2", ...
    std::string id() const;

    // Inverse of id(). Also accepts bare family names (MB, Markov, LR, LSVM),
    // which default to alpha = 1 or an L2 penalty.
    static ModelConfig parse(const std::string& id);
};

std::string family_name(ModelFamily family);

// The 16 classifiers of the study: MB and Markov with MLE and five alphas,
// LR and LSVM with L1 and L2 penalties.
std::vector<ModelConfig> paper_models(const Penalty& l1 = Penalty::l1(),
                                      const Penalty& l2 = Penalty::l2(),
                                      const SolverOptions& solver = {});

using TrainedModel = std::variant<MultinomialBayesModel, MarkovChainModel, OneVsRestModel>;

TrainedModel fit_model(const ModelConfig& config, const ProfileMatrix& train,
                       std::size_t workers = 1);
std::vector<Prediction> predict(const TrainedModel& model, const ProfileMatrix& matrix);

// Per-class scores for one row of `matrix`.
std::vector<double> score_row(const TrainedModel& model, const ProfileMatrix& matrix,
                              std::size_t row);

const KmerSpec& model_spec(const TrainedModel& model);
const std::vector<std::string>& model_classes(const TrainedModel& model);
bool model_needs_pairs(const TrainedModel& model);

}  // namespace afc
