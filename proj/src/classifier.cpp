#include "afc/classifier.hpp"

#include <fmt/format.h>

#include "afc/error.hpp"

namespace afc {

std::string family_name(ModelFamily family) {
    switch (family) {
        case ModelFamily::MultinomialBayes: return "MB";
        case ModelFamily::Markov: return "Markov";
        case ModelFamily::LogisticRegression: return "LR";
        case ModelFamily::LinearSvm: return "LSVM";
    }
    return "?";
}

std::string ModelConfig::id() const {
    std::string name = family_name(family) + "_";
    if (generative()) {
        return name + (policy.is_mle() ? std::string("MLE") : fmt::format("a{}", policy.alpha));
    }
    return name + (penalty.kind == Penalty::Kind::L1 ? "L1" : "L2");
}

ModelConfig ModelConfig::parse(const std::string& id) {
    const auto underscore = id.find('_');
    const std::string head = id.substr(0, underscore);
    const std::string tail = underscore == std::string::npos ? "" : id.substr(underscore + 1);

    ModelConfig config;
    if (head == "MB") {
        config.family = ModelFamily::MultinomialBayes;
    } else if (head == "Markov") {
        config.family = ModelFamily::Markov;
    } else if (head == "LR") {
        config.family = ModelFamily::LogisticRegression;
    } else if (head == "LSVM") {
        config.family = ModelFamily::LinearSvm;
    } else {
        throw ConfigError("unknown model '" + id + "' (expected MB, Markov, LR or LSVM)");
    }

    if (config.generative()) {
        if (tail.empty()) {
            config.policy = SmoothingPolicy::bayesian(1.0);
        } else if (tail == "MLE") {
            config.policy = SmoothingPolicy::mle();
        } else if (tail.size() > 1 && tail[0] == 'a') {
            std::size_t used = 0;
            double alpha = 0.0;
            try {
                alpha = std::stod(tail.substr(1), &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tail.size() - 1) throw ConfigError("bad smoothing value in model '" + id + "'");
            config.policy = SmoothingPolicy::bayesian(alpha);
        } else {
            throw ConfigError("bad smoothing suffix in model '" + id + "' (use MLE or a<alpha>)");
        }
        return config;
    }

    if (tail.empty() || tail == "L2") {
        config.penalty = Penalty::l2();
    } else if (tail == "L1") {
        config.penalty = Penalty::l1();
    } else {
        throw ConfigError("bad penalty in model '" + id + "' (use L1 or L2)");
    }
    return config;
}

std::vector<ModelConfig> paper_models(const Penalty& l1, const Penalty& l2,
                                      const SolverOptions& solver) {
    std::vector<ModelConfig> models;
    for (ModelFamily family : {ModelFamily::MultinomialBayes, ModelFamily::Markov}) {
        ModelConfig config;
        config.family = family;
        config.policy = SmoothingPolicy::mle();
        models.push_back(config);
        for (double alpha : kPaperAlphas) {
            config.policy = SmoothingPolicy::bayesian(alpha);
            models.push_back(config);
        }
    }
    for (ModelFamily family : {ModelFamily::LogisticRegression, ModelFamily::LinearSvm}) {
        for (const Penalty& penalty : {l1, l2}) {
            ModelConfig config;
            config.family = family;
            config.penalty = penalty;
            config.solver = solver;
            models.push_back(config);
        }
    }
    return models;
}

TrainedModel fit_model(const ModelConfig& config, const ProfileMatrix& train, std::size_t workers) {
    switch (config.family) {
        case ModelFamily::MultinomialBayes:
            return fit_multinomial_bayes(train, config.policy);
        case ModelFamily::Markov:
            return fit_markov(train, config.policy);
        case ModelFamily::LogisticRegression:
        case ModelFamily::LinearSvm:
            return fit_ovr(train, config.loss(), config.penalty, config.solver, workers);
    }
    throw ConfigError("unknown model family");
}

std::vector<Prediction> predict(const TrainedModel& model, const ProfileMatrix& matrix) {
    return std::visit([&](const auto& m) { return predict(m, matrix); }, model);
}

std::vector<double> score_row(const TrainedModel& model, const ProfileMatrix& matrix,
                              std::size_t row) {
    if (const auto* mb = std::get_if<MultinomialBayesModel>(&model)) {
        return score_multinomial_bayes(*mb, matrix.rows.at(row));
    }
    if (const auto* mc = std::get_if<MarkovChainModel>(&model)) {
        if (!matrix.paired()) throw ConfigError("Markov chain scoring needs paired profiles");
        return score_markov(*mc, PairedProfile{matrix.rows.at(row), matrix.lower.at(row)});
    }
    return decision_function(std::get<OneVsRestModel>(model), matrix.rows.at(row));
}

const KmerSpec& model_spec(const TrainedModel& model) {
    return std::visit([](const auto& m) -> const KmerSpec& { return m.spec; }, model);
}

const std::vector<std::string>& model_classes(const TrainedModel& model) {
    return std::visit([](const auto& m) -> const std::vector<std::string>& { return m.classes; },
                      model);
}

bool model_needs_pairs(const TrainedModel& model) {
    return std::holds_alternative<MarkovChainModel>(model);
}

}  // namespace afc
