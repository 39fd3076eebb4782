#include <doctest.h>

#include <cmath>
#include <random>

#include "afc/error.hpp"
#include "afc/generative.hpp"
#include "oracles.hpp"

using namespace afc;

namespace {

ProfileMatrix matrix_of(const std::vector<std::string>& seqs, const std::vector<ClassIndex>& labels,
                        std::size_t classes, int k, bool paired) {
    LabeledDataset ds;
    for (std::size_t i = 0; i < seqs.size(); ++i) {
        ds.sequences.push_back({"s" + std::to_string(i), seqs[i]});
    }
    ds.labels = labels;
    for (std::size_t c = 0; c < classes; ++c) ds.classes.push_back("c" + std::to_string(c));
    return build_matrix(ds, KmerSpec(k), paired);
}

std::vector<double> normalized(std::vector<double> scores) {
    const double z = oracle::log_sum_exp(scores);
    for (auto& s : scores) s -= z;
    return scores;
}

// Positional form: z covers only the (k-1)-mers that condition a window,
// so the final (k-1)-mer is left out.
PairedProfile positional_pair(const std::string& s, int k) {
    return {build_profile(s, KmerSpec(k)), build_profile(s.substr(0, s.size() - 1), KmerSpec(k - 1))};
}

}  // namespace

TEST_CASE("smoothing policy validation") {
    CHECK_THROWS_AS(SmoothingPolicy::bayesian(0.0), ConfigError);
    CHECK_THROWS_AS(SmoothingPolicy::bayesian(-1.0), ConfigError);
    CHECK_THROWS_AS(SmoothingPolicy::bayesian(INFINITY), ConfigError);
    CHECK(SmoothingPolicy::bayesian(1e-100).alpha == 1e-100);
    CHECK(SmoothingPolicy::mle().is_mle());
}

TEST_CASE("MLE single class") {
    const auto m = fit_multinomial_bayes(matrix_of({"AAAA"}, {0}, 1, 2, false), SmoothingPolicy::mle());
    CHECK(m.densities[0].log_prob(0) == 0.0);
    CHECK(m.densities[0].log_prob(1) == -INFINITY);
    CHECK(m.log_priors[0] == 0.0);
}

TEST_CASE("equal class sizes give equal priors") {
    const auto m = fit_multinomial_bayes(matrix_of({"ACGT", "GGCC", "TTAA", "CATG"}, {0, 1, 1, 0}, 2, 2, false),
                                         SmoothingPolicy::bayesian(1));
    CHECK(m.log_priors[0] == doctest::Approx(std::log(0.5)));
    CHECK(m.log_priors[1] == doctest::Approx(std::log(0.5)));
}

TEST_CASE("empty profile scores the prior") {
    const auto m = fit_multinomial_bayes(matrix_of({"ACGT", "GGCC", "TTAA"}, {0, 1, 1}, 2, 2, false),
                                         SmoothingPolicy::bayesian(0.5));
    const auto empty = build_profile("NNNN", KmerSpec(2));
    const auto s = score_multinomial_bayes(m, empty);
    CHECK(s[0] == m.log_priors[0]);
    CHECK(s[1] == m.log_priors[1]);
    CHECK_THROWS_AS(score_multinomial_bayes(m, build_profile("ACG", KmerSpec(3))), ConfigError);
}

TEST_CASE("MLE word unseen everywhere falls back to the prior argmax") {
    const std::vector<std::string> train = {"AAAAC", "AACAA", "CCCCA", "CACCC", "CCACC"};
    const auto m = fit_multinomial_bayes(matrix_of(train, {0, 0, 1, 1, 1}, 2, 2, false),
                                         SmoothingPolicy::mle());
    const auto profile = build_profile("AAGTT", KmerSpec(2));
    const auto s = score_multinomial_bayes(m, profile);
    CHECK(s[0] == -INFINITY);
    CHECK(s[1] == -INFINITY);
    const auto pred = argmax_scores(s, m.log_priors);
    CHECK(pred.fallback);
    CHECK(pred.label == 1);  // three of five rows

    // Enumerated posteriors are undefined everywhere too.
    const auto probs = oracle::dense_word_probs(train, {0, 0, 1, 1, 1}, 2, 2, 0.0);
    const auto post = oracle::multinomial_log_posterior(probs, {0.4, 0.6}, "AAGTT", 2);
    CHECK(std::isnan(post[0]));
}

TEST_CASE("multinomial scores against explicit posterior enumeration") {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        const int k = 1 + trial % 3;
        std::vector<std::string> train;
        std::vector<int> labels;
        for (int i = 0; i < 5; ++i) {
            train.push_back(oracle::random_dna(rng, 6 + rng() % 20));
            labels.push_back(i < 2 ? 0 : (i < 4 ? 1 : 2));
        }
        const std::vector<ClassIndex> ulabels(labels.begin(), labels.end());
        const std::string query = oracle::random_dna(rng, 8 + rng() % 10);
        for (double alpha : {1e-5, 1e-2, 1.0}) {
            const auto m = fit_multinomial_bayes(matrix_of(train, ulabels, 3, k, false),
                                                 SmoothingPolicy::bayesian(alpha));
            const auto got = normalized(score_multinomial_bayes(m, build_profile(query, KmerSpec(k))));
            const auto want = oracle::multinomial_log_posterior(
                oracle::dense_word_probs(train, labels, 3, k, alpha), {0.4, 0.4, 0.2}, query, k);
            for (int c = 0; c < 3; ++c) CHECK(got[c] == doctest::Approx(want[c]).epsilon(1e-9));
        }
    }
}

TEST_CASE("normalization of both word families") {
    const std::vector<std::string> train = {"ACGTTGCA", "AAAACCCG", "GGGTTTAC"};
    for (auto policy : {SmoothingPolicy::mle(), SmoothingPolicy::bayesian(1.0),
                        SmoothingPolicy::bayesian(1e-5)}) {
        for (int k : {2, 3, 4}) {
            const auto m = fit_markov(matrix_of(train, {0, 1, 1}, 2, k, true), policy);
            for (int c = 0; c < 2; ++c) {
                for (const auto* family : {&m.upper[c], &m.lower[c]}) {
                    // Dense enumeration over the full vocabulary.
                    double total = 0.0;
                    for (KmerCode w = 0; w < family->vocabulary_size; ++w) total += std::exp(family->log_prob(w));
                    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
                    CHECK(family->mass() == doctest::Approx(1.0).epsilon(1e-12));
                }
            }
        }
    }
    // Closed-form seen/unseen split at a large k.
    const auto big = fit_multinomial_bayes(matrix_of(train, {0, 1, 1}, 2, 7, false),
                                           SmoothingPolicy::bayesian(0.01));
    CHECK(big.densities[1].mass() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("Markov AAAA") {
    const auto m = fit_markov(matrix_of({"AAAA"}, {0}, 1, 2, true), SmoothingPolicy::mle());
    CHECK(m.upper[0].log_prob(0) == 0.0);
    CHECK(m.lower[0].log_prob(0) == 0.0);
    CHECK(m.lower[0].log_prob(3) == -INFINITY);
}

TEST_CASE("Markov score equals the positional product") {
    const std::vector<std::string> train = {"ACGTACGGTCA", "TTGACCATGCA", "GGGCCCATATA"};
    const auto m = fit_markov(matrix_of(train, {0, 1, 1}, 2, 2, true), SmoothingPolicy::bayesian(1.0));
    const auto s = score_markov(m, positional_pair("ACGT", 2));
    for (int c = 0; c < 2; ++c) {
        // log P(s_i | s_{i-1}) = log P(s_{i-1} s_i) - log P(s_{i-1}), positions 1..3.
        double direct = 0.0;
        for (std::size_t i = 1; i < 4; ++i) {
            direct += m.upper[c].log_prob(*kmer_index(std::string("ACGT").substr(i - 1, 2)));
            direct -= m.lower[c].log_prob(*kmer_index(std::string("ACGT").substr(i - 1, 1)));
        }
        CHECK(s[c] - m.log_priors[c] == doctest::Approx(direct).epsilon(1e-12));
    }

    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 30; ++trial) {
        const int k = 2 + trial % 3;
        const std::string q = oracle::random_dna(rng, k + 1 + rng() % 20);
        const auto mk = fit_markov(matrix_of(train, {0, 1, 1}, 2, k, true), SmoothingPolicy::bayesian(0.1));
        const auto score = score_markov(mk, positional_pair(q, k));
        const std::vector<int> labels{0, 1, 1};
        const auto up = oracle::dense_word_probs(train, labels, 2, k, 0.1);
        const auto lo = oracle::dense_word_probs(train, labels, 2, k - 1, 0.1);
        for (int c = 0; c < 2; ++c) {
            CHECK(score[c] - mk.log_priors[c] ==
                  doctest::Approx(oracle::markov_positional(up[c], lo[c], q, k)).epsilon(1e-9));
        }
    }
}

TEST_CASE("disjoint dinucleotide classes score their own sequences higher") {
    // Class 0 uses only A/C, class 1 only G/T. Under smoothing the two word
    // families are normalized separately, so an unseen transition scores
    // log(C_{k-1} / C_k) ~ 0 and a foreign sequence can outscore its own
    // class; the separation is clean under MLE.
    std::mt19937_64 rng(8);
    auto draw = [&](const char* alphabet) {
        std::string s(60, 'A');
        for (auto& c : s) c = alphabet[rng() % 2];
        return s;
    };
    std::vector<std::string> train;
    for (int i = 0; i < 4; ++i) train.push_back(draw(i % 2 ? "GT" : "AC"));
    const std::vector<int> labels{0, 1, 0, 1};
    const auto m = fit_markov(matrix_of(train, {0, 1, 0, 1}, 2, 3, true), SmoothingPolicy::mle());
    const auto up = oracle::dense_word_probs(train, labels, 2, 3, 0.0);
    const auto lo = oracle::dense_word_probs(train, labels, 2, 2, 0.0);
    for (int i = 0; i < 10; ++i) {
        const ClassIndex cls = i % 2;
        const std::string q = draw(cls ? "GT" : "AC");
        const auto s = score_markov(m, positional_pair(q, 3));
        CHECK(std::isfinite(s[cls]));
        CHECK(s[cls] > s[1 - cls]);
        CHECK(s[cls] - m.log_priors[cls] ==
              doctest::Approx(oracle::markov_positional(up[cls], lo[cls], q, 3)).epsilon(1e-9));
        // 0/0 in the positional product; the library marks the class impossible.
        CHECK_FALSE(std::isfinite(oracle::markov_positional(up[1 - cls], lo[1 - cls], q, 3)));
        CHECK(s[1 - cls] == -INFINITY);
    }
}

TEST_CASE("Markov score of an all-N profile is the prior") {
    const auto m = fit_markov(matrix_of({"ACGTAC", "TTGACA"}, {0, 1}, 2, 3, true), SmoothingPolicy::mle());
    const auto s = score_markov(m, build_paired_profile("NNNNN", KmerSpec(3)));
    CHECK(s[0] == m.log_priors[0]);
    CHECK(s[1] == m.log_priors[1]);
}

TEST_CASE("a near-uniform model scores all classes alike") {
    const std::vector<std::string> train = {"ACGTACGTAAA", "TTTTGGGGCCC", "ACACACAGAG"};
    const auto mx = matrix_of(train, {0, 1, 2}, 3, 3, true);
    const auto m6 = fit_markov(mx, SmoothingPolicy::bayesian(1e6));
    const auto m9 = fit_markov(mx, SmoothingPolicy::bayesian(1e9));
    std::mt19937_64 rng(4);
    for (int i = 0; i < 20; ++i) {
        const std::size_t len = 3 + rng() % 60;
        const auto pp = build_paired_profile(oracle::random_dna(rng, len), KmerSpec(3));
        // A window moves its log-probability by at most (count + total) / alpha
        // from the uniform value; counts and totals here are below 10.
        const auto s = score_markov(m6, pp);
        const double bound = 2.0 * static_cast<double>(len) * 20.0 / 1e6;
        CHECK(std::abs(s[0] - s[1]) < bound);
        CHECK(std::abs(s[1] - s[2]) < bound);
        const auto t = score_markov(m9, pp);
        CHECK(std::abs(t[0] - t[1]) < 1e-6);
        CHECK(std::abs(t[1] - t[2]) < 1e-6);
    }
}

TEST_CASE("MLE Markov marks classes with unseen words impossible") {
    const auto m = fit_markov(matrix_of({"AAAAAA", "CCCCCC"}, {0, 1}, 2, 2, true), SmoothingPolicy::mle());
    const auto s = score_markov(m, build_paired_profile("AAAC", KmerSpec(2)));
    CHECK(s[0] == -INFINITY);
    CHECK(s[1] == -INFINITY);
    const auto own = score_markov(m, build_paired_profile("AAAA", KmerSpec(2)));
    CHECK(std::isfinite(own[0]));
    CHECK(own[1] == -INFINITY);
    CHECK_THROWS_AS(fit_markov(matrix_of({"AAAA"}, {0}, 1, 2, false), SmoothingPolicy::mle()), FitError);
}

TEST_CASE("argmax and tie break") {
    CHECK(argmax_scores({-1.0, -2.0}, {0.0, 0.0}).label == 0);
    CHECK(argmax_scores({-2.0, -1.0}, {0.0, 0.0}).label == 1);
    CHECK(argmax_scores({-1.0, -1.0}, {0.0, 0.0}).label == 0);
    const auto p = argmax_scores({NAN, -INFINITY, -5.0}, {0, 0, 0});
    CHECK(p.label == 2);
    CHECK_FALSE(p.fallback);
}

TEST_CASE("adding a constant to every score leaves the argmax") {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> u(-50, 0);
    for (int i = 0; i < 200; ++i) {
        std::vector<double> s(5);
        for (auto& x : s) x = u(rng);
        const auto base = argmax_scores(s, std::vector<double>(5, 0.0)).label;
        const double shift = u(rng) * 10;
        for (auto& x : s) x += shift;
        CHECK(argmax_scores(s, std::vector<double>(5, 0.0)).label == base);
    }
}

TEST_CASE("three-class toy set matches brute-force posterior argmax") {
    std::mt19937_64 rng(9);
    const std::vector<std::string> train = {"AACAGATAAC", "CCGCTCCACG", "GTTGGTGTGG", "AAACATAAGA",
                                            "CCCTCGCCAC"};
    const std::vector<int> labels = {0, 1, 2, 0, 1};
    const std::vector<ClassIndex> ulabels(labels.begin(), labels.end());
    const auto matrix = matrix_of(train, ulabels, 3, 2, false);
    const auto m = fit_multinomial_bayes(matrix, SmoothingPolicy::bayesian(0.5));
    const auto probs = oracle::dense_word_probs(train, labels, 3, 2, 0.5);
    for (int i = 0; i < 50; ++i) {
        const std::string q = oracle::random_dna(rng, 5 + rng() % 15);
        const auto post = oracle::multinomial_log_posterior(probs, {0.4, 0.4, 0.2}, q, 2);
        const auto best = std::max_element(post.begin(), post.end()) - post.begin();
        CHECK(argmax_scores(score_multinomial_bayes(m, build_profile(q, KmerSpec(2))), m.log_priors).label ==
              static_cast<ClassIndex>(best));
    }
    const auto preds = predict(m, matrix);
    for (std::size_t r = 0; r < preds.size(); ++r) CHECK(preds[r].label == ulabels[r]);
}

TEST_CASE("tiny alpha converges to MLE on seen words") {
    const std::vector<std::string> train = {"ACGTTGCAAC", "GGCATTACGA", "TTTACGGACA"};
    const auto mx = matrix_of(train, {0, 1, 1}, 2, 3, true);
    const auto mle = fit_multinomial_bayes(mx, SmoothingPolicy::mle());
    const auto tiny = fit_multinomial_bayes(mx, SmoothingPolicy::bayesian(1e-100));
    const auto mk_mle = fit_markov(mx, SmoothingPolicy::mle());
    const auto mk_tiny = fit_markov(mx, SmoothingPolicy::bayesian(1e-100));
    for (const auto& seq : train) {
        const auto a = score_multinomial_bayes(mle, build_profile(seq, KmerSpec(3)));
        const auto b = score_multinomial_bayes(tiny, build_profile(seq, KmerSpec(3)));
        const auto pa = score_markov(mk_mle, build_paired_profile(seq, KmerSpec(3)));
        const auto pb = score_markov(mk_tiny, build_paired_profile(seq, KmerSpec(3)));
        for (int c = 0; c < 2; ++c) {
            if (std::isfinite(a[c])) CHECK(b[c] == doctest::Approx(a[c]).epsilon(1e-6));
            if (std::isfinite(pa[c])) CHECK(pb[c] == doctest::Approx(pa[c]).epsilon(1e-6));
        }
    }
    // Seen by class 0 only: MLE class 1 is impossible, tiny alpha is hugely negative.
    const auto own = build_profile(train[0], KmerSpec(3));
    CHECK(score_multinomial_bayes(tiny, own)[1] < -100.0);
}

TEST_CASE("duplicating a training sequence does not lower its words") {
    const std::vector<std::string> base = {"ACGTTGCAAC", "GGCATTACGA", "TTTACGGACA"};
    auto dup = base;
    dup.push_back(base[0]);
    for (auto policy : {SmoothingPolicy::mle(), SmoothingPolicy::bayesian(1.0)}) {
        const auto before = fit_multinomial_bayes(matrix_of(base, {0, 1, 1}, 2, 3, false), policy);
        const auto after = fit_multinomial_bayes(matrix_of(dup, {0, 1, 1, 0}, 2, 3, false), policy);
        for (auto [code, n] : build_profile(base[0], KmerSpec(3)).counts) {
            CHECK(after.densities[0].log_prob(code) >= before.densities[0].log_prob(code) - 1e-15);
        }
    }
}

TEST_CASE("fit errors") {
    ProfileMatrix empty;
    empty.spec = KmerSpec(2);
    empty.classes = {"a"};
    CHECK_THROWS_AS(fit_multinomial_bayes(empty, SmoothingPolicy::mle()), FitError);
    // A declared class with no rows.
    auto mx = matrix_of({"ACGT", "GGTT"}, {0, 0}, 2, 2, false);
    CHECK_THROWS_AS(fit_multinomial_bayes(mx, SmoothingPolicy::bayesian(1)), FitError);
}
