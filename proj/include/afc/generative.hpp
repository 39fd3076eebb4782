#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "afc/kmer_features.hpp"

namespace afc {

// Maximum likelihood (plain count ratios) or add-alpha smoothing.
struct SmoothingPolicy {
    enum class Kind { Mle, Bayesian };

    Kind kind = Kind::Bayesian;
    double alpha = 1.0;

    static SmoothingPolicy mle() { return {Kind::Mle, 0.0}; }
    static SmoothingPolicy bayesian(double alpha);

    bool is_mle() const noexcept { return kind == Kind::Mle; }
    bool operator==(const SmoothingPolicy&) const = default;
};

// The study's smoothing grid.
inline const std::vector<double> kPaperAlphas = {1e-100, 1e-10, 1e-5, 1e-2, 1.0};

// Log-probabilities of words of one length under one class. Words not
// stored take `default_log`, which is -inf for MLE estimates.
struct WordDensity {
    std::uint64_t vocabulary_size = 0;
    std::vector<KmerCode> words;    // ascending
    std::vector<double> log_probs;  // parallel to words
    double default_log = 0.0;

    double log_prob(KmerCode code) const noexcept;

    // Total probability mass: stored words plus the unseen remainder.
    double mass() const;

    // Sum of count * log P(word) over a profile. -inf as soon as one
    // observed word has zero probability.
    double log_likelihood(const KmerProfile& profile) const noexcept;
};

// Pools counts of the rows of each class and estimates one WordDensity
// per class.
std::vector<WordDensity> estimate_densities(const std::vector<KmerProfile>& rows,
                                            const std::vector<ClassIndex>& labels,
                                            std::size_t class_count, std::uint64_t vocabulary_size,
                                            const SmoothingPolicy& policy);

// Per-class log P(T_t) from class frequencies.
std::vector<double> class_log_priors(const std::vector<ClassIndex>& labels,
                                     std::size_t class_count);

struct MultinomialBayesModel {
    KmerSpec spec{1};
    std::vector<std::string> classes;
    SmoothingPolicy policy;
    std::vector<double> log_priors;
    std::vector<WordDensity> densities;  // one per class
};

struct MarkovChainModel {
    KmerSpec spec{2};
    std::vector<std::string> classes;
    SmoothingPolicy policy;
    std::vector<double> log_priors;
    std::vector<WordDensity> upper;  // k-mer densities, one per class
    std::vector<WordDensity> lower;  // (k-1)-mer densities, one per class
};

MultinomialBayesModel fit_multinomial_bayes(const ProfileMatrix& matrix,
                                            const SmoothingPolicy& policy);

// Unnormalized log posterior per class. The multinomial coefficient is
// omitted since it is the same for every class.
std::vector<double> score_multinomial_bayes(const MultinomialBayesModel& model,
                                            const KmerProfile& profile);

// Requires a paired matrix.
MarkovChainModel fit_markov(const ProfileMatrix& matrix, const SmoothingPolicy& policy);

// log P(T) + sum x_i log P(u_i|T) - sum z_i log P(v_i|T). A class is scored
// -inf when any observed word or prefix has zero probability under it.
std::vector<double> score_markov(const MarkovChainModel& model, const PairedProfile& profile);

struct Prediction {
    ClassIndex label = 0;
    // Every class scored -inf (or NaN); the label is the prior argmax.
    bool fallback = false;
};

// Argmax with lowest-index tie break. When no score is finite, falls back
// to the argmax of `log_priors` and flags the prediction.
Prediction argmax_scores(const std::vector<double>& scores, const std::vector<double>& log_priors);

std::vector<Prediction> predict(const MultinomialBayesModel& model, const ProfileMatrix& matrix);
std::vector<Prediction> predict(const MarkovChainModel& model, const ProfileMatrix& matrix);

}  // namespace afc
