#include "afc/generative.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "afc/error.hpp"

namespace afc {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void check_matrix(const ProfileMatrix& matrix) {
    if (matrix.size() == 0) throw FitError("cannot fit a model on an empty matrix");
    if (matrix.labels.size() != matrix.size()) throw FitError("labels do not match matrix rows");
    if (matrix.classes.empty()) throw FitError("matrix carries no class names");
}

void check_spec(const KmerSpec& model, const KmerSpec& profile) {
    if (!(model == profile)) {
        throw ConfigError("profile k=" + std::to_string(profile.k()) +
                          " does not match model k=" + std::to_string(model.k()));
    }
}

}  // namespace

SmoothingPolicy SmoothingPolicy::bayesian(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
        throw ConfigError("smoothing alpha must be a positive finite number");
    }
    return {Kind::Bayesian, alpha};
}

double WordDensity::log_prob(KmerCode code) const noexcept {
    const auto it = std::lower_bound(words.begin(), words.end(), code);
    if (it != words.end() && *it == code) {
        return log_probs[static_cast<std::size_t>(it - words.begin())];
    }
    return default_log;
}

double WordDensity::mass() const {
    double seen = 0.0;
    for (double lp : log_probs) seen += std::exp(lp);
    const double unseen_words = static_cast<double>(vocabulary_size - words.size());
    return seen + unseen_words * std::exp(default_log);
}

double WordDensity::log_likelihood(const KmerProfile& profile) const noexcept {
    double total = 0.0;
    auto cursor = words.begin();
    for (const auto& [code, count] : profile.counts) {
        cursor = std::lower_bound(cursor, words.end(), code);
        double lp = default_log;
        if (cursor != words.end() && *cursor == code) {
            lp = log_probs[static_cast<std::size_t>(cursor - words.begin())];
        }
        if (lp == kNegInf) return kNegInf;
        total += static_cast<double>(count) * lp;
    }
    return total;
}

std::vector<WordDensity> estimate_densities(const std::vector<KmerProfile>& rows,
                                            const std::vector<ClassIndex>& labels,
                                            std::size_t class_count, std::uint64_t vocabulary_size,
                                            const SmoothingPolicy& policy) {
    std::vector<std::vector<KmerProfile::Entry>> pooled(class_count);
    for (std::size_t r = 0; r < rows.size(); ++r) {
        auto& bucket = pooled.at(labels[r]);
        bucket.insert(bucket.end(), rows[r].counts.begin(), rows[r].counts.end());
    }

    std::vector<WordDensity> densities(class_count);
    for (std::size_t c = 0; c < class_count; ++c) {
        auto& entries = pooled[c];
        std::sort(entries.begin(), entries.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        WordDensity& density = densities[c];
        density.vocabulary_size = vocabulary_size;
        std::vector<std::uint64_t> counts;
        std::uint64_t class_total = 0;
        for (const auto& [code, count] : entries) {
            if (!density.words.empty() && density.words.back() == code) {
                counts.back() += count;
            } else {
                density.words.push_back(code);
                counts.push_back(count);
            }
            class_total += count;
        }
        if (class_total == 0) {
            throw FitError("class index " + std::to_string(c) + " has no counted words");
        }

        const double alpha = policy.is_mle() ? 0.0 : policy.alpha;
        const double log_denominator =
            std::log(static_cast<double>(class_total) + alpha * static_cast<double>(vocabulary_size));
        density.log_probs.reserve(counts.size());
        for (std::uint64_t count : counts) {
            density.log_probs.push_back(std::log(static_cast<double>(count) + alpha) -
                                        log_denominator);
        }
        density.default_log = policy.is_mle() ? kNegInf : std::log(alpha) - log_denominator;
    }
    return densities;
}

std::vector<double> class_log_priors(const std::vector<ClassIndex>& labels,
                                     std::size_t class_count) {
    std::vector<double> counts(class_count, 0.0);
    for (ClassIndex label : labels) counts.at(label) += 1.0;
    std::vector<double> priors(class_count);
    const double n = static_cast<double>(labels.size());
    for (std::size_t c = 0; c < class_count; ++c) {
        if (counts[c] == 0.0) throw FitError("class index " + std::to_string(c) + " has no rows");
        priors[c] = std::log(counts[c] / n);
    }
    return priors;
}

MultinomialBayesModel fit_multinomial_bayes(const ProfileMatrix& matrix,
                                            const SmoothingPolicy& policy) {
    check_matrix(matrix);
    MultinomialBayesModel model;
    model.spec = matrix.spec;
    model.classes = matrix.classes;
    model.policy = policy;
    model.log_priors = class_log_priors(matrix.labels, matrix.classes.size());
    model.densities = estimate_densities(matrix.rows, matrix.labels, matrix.classes.size(),
                                         matrix.spec.vocabulary_size(), policy);
    return model;
}

std::vector<double> score_multinomial_bayes(const MultinomialBayesModel& model,
                                            const KmerProfile& profile) {
    check_spec(model.spec, profile.spec);
    std::vector<double> scores(model.classes.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        scores[c] = model.log_priors[c] + model.densities[c].log_likelihood(profile);
    }
    return scores;
}

MarkovChainModel fit_markov(const ProfileMatrix& matrix, const SmoothingPolicy& policy) {
    check_matrix(matrix);
    if (!matrix.paired()) throw FitError("Markov chain models need paired (k, k-1) profiles");
    MarkovChainModel model;
    model.spec = matrix.spec;
    model.classes = matrix.classes;
    model.policy = policy;
    model.log_priors = class_log_priors(matrix.labels, matrix.classes.size());
    model.upper = estimate_densities(matrix.rows, matrix.labels, matrix.classes.size(),
                                     matrix.spec.vocabulary_size(), policy);
    model.lower = estimate_densities(matrix.lower, matrix.labels, matrix.classes.size(),
                                     KmerSpec(matrix.spec.k() - 1).vocabulary_size(), policy);
    return model;
}

namespace {

std::vector<double> markov_scores(const MarkovChainModel& model, const KmerProfile& upper,
                                  const KmerProfile& lower) {
    check_spec(model.spec, upper.spec);
    check_spec(KmerSpec(model.spec.k() - 1), lower.spec);
    std::vector<double> scores(model.classes.size());
    for (std::size_t c = 0; c < scores.size(); ++c) {
        const double words = model.upper[c].log_likelihood(upper);
        const double prefixes = model.lower[c].log_likelihood(lower);
        // An unseen prefix would enter with +inf; the class is impossible.
        if (words == kNegInf || prefixes == kNegInf) {
            scores[c] = kNegInf;
            continue;
        }
        const double score = model.log_priors[c] + words - prefixes;
        scores[c] = std::isfinite(score) ? score : kNegInf;
    }
    return scores;
}

}  // namespace

std::vector<double> score_markov(const MarkovChainModel& model, const PairedProfile& profile) {
    return markov_scores(model, profile.upper, profile.lower);
}

Prediction argmax_scores(const std::vector<double>& scores, const std::vector<double>& log_priors) {
    Prediction best;
    bool found = false;
    double best_score = kNegInf;
    for (std::size_t c = 0; c < scores.size(); ++c) {
        const double s = scores[c];
        if (std::isnan(s) || s == kNegInf) continue;
        if (!found || s > best_score) {
            best = Prediction{c, false};
            best_score = s;
            found = true;
        }
    }
    if (found) return best;
    best.fallback = true;
    best.label = static_cast<ClassIndex>(
        std::max_element(log_priors.begin(), log_priors.end()) - log_priors.begin());
    return best;
}

std::vector<Prediction> predict(const MultinomialBayesModel& model, const ProfileMatrix& matrix) {
    std::vector<Prediction> out;
    out.reserve(matrix.size());
    for (const auto& row : matrix.rows) {
        out.push_back(argmax_scores(score_multinomial_bayes(model, row), model.log_priors));
    }
    return out;
}

std::vector<Prediction> predict(const MarkovChainModel& model, const ProfileMatrix& matrix) {
    if (!matrix.paired()) throw ConfigError("Markov chain prediction needs paired profiles");
    std::vector<Prediction> out;
    out.reserve(matrix.size());
    for (std::size_t r = 0; r < matrix.size(); ++r) {
        out.push_back(
            argmax_scores(markov_scores(model, matrix.rows[r], matrix.lower[r]), model.log_priors));
    }
    return out;
}

}  // namespace afc
