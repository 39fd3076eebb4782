#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "afc/error.hpp"
#include "afc/kmer_features.hpp"
#include "oracles.hpp"

using namespace afc;

namespace {

std::map<std::uint64_t, std::uint32_t> as_map(const KmerProfile& p) {
    return {p.counts.begin(), p.counts.end()};
}

std::uint64_t code(const std::string& w) { return *kmer_index(w); }

}  // namespace

TEST_CASE("kmer_index") {
    CHECK(kmer_index("AA") == 0u);
    CHECK(kmer_index("TT") == 15u);
    CHECK(kmer_index("CGT") == 27u);
    CHECK_FALSE(kmer_index("ANA").has_value());
    CHECK_FALSE(kmer_index("acg").has_value());
    CHECK(kmer_word(27, 3) == "CGT");
    std::mt19937_64 rng(1);
    for (int i = 0; i < 100; ++i) {
        const int k = 1 + static_cast<int>(rng() % 31);
        const std::string w = oracle::random_dna(rng, k);
        CHECK(kmer_word(*kmer_index(w), k) == w);
    }
}

TEST_CASE("KmerSpec range") {
    CHECK_THROWS_AS(KmerSpec(0), ConfigError);
    CHECK_THROWS_AS(KmerSpec(32), ConfigError);
    CHECK(KmerSpec(15).vocabulary_size() == (std::uint64_t{1} << 30));
}

TEST_CASE("profile examples") {
    const auto p = build_profile("ACGTA", KmerSpec(2));
    CHECK(as_map(p) == std::map<std::uint64_t, std::uint32_t>{
                           {code("AC"), 1}, {code("CG"), 1}, {code("GT"), 1}, {code("TA"), 1}});
    CHECK(p.total == 4);

    const auto aa = build_profile("AAAA", KmerSpec(2));
    CHECK(as_map(aa) == std::map<std::uint64_t, std::uint32_t>{{0, 3}});
    CHECK(aa.total == 3);

    const auto n = build_profile("ACNGT", KmerSpec(2));
    CHECK(as_map(n) == std::map<std::uint64_t, std::uint32_t>{{code("AC"), 1}, {code("GT"), 1}});
    CHECK(n.total == 2);
    CHECK(n.skipped == 2);
}

TEST_CASE("short sequence is an error, all-N is an empty profile") {
    CHECK_THROWS_AS(build_profile("ACG", KmerSpec(4)), ShortSequenceError);
    const auto p = build_profile("NNNN", KmerSpec(2));
    CHECK(p.counts.empty());
    CHECK(p.total == 0);
    CHECK(p.skipped == 3);
    CHECK_NOTHROW(build_profile("ACGT", KmerSpec(4)));
}

TEST_CASE("paired profile examples") {
    auto pp = build_paired_profile("ACGT", KmerSpec(2));
    CHECK(as_map(pp.upper) == std::map<std::uint64_t, std::uint32_t>{
                                  {code("AC"), 1}, {code("CG"), 1}, {code("GT"), 1}});
    CHECK(as_map(pp.lower) == std::map<std::uint64_t, std::uint32_t>{{0, 1}, {1, 1}, {2, 1}, {3, 1}});

    pp = build_paired_profile("AAA", KmerSpec(2));
    CHECK(as_map(pp.upper) == std::map<std::uint64_t, std::uint32_t>{{0, 2}});
    CHECK(as_map(pp.lower) == std::map<std::uint64_t, std::uint32_t>{{0, 3}});

    pp = build_paired_profile("ACGTACGT", KmerSpec(3));
    CHECK(as_map(pp.upper) == oracle::window_scan("ACGTACGT", 3));
    CHECK(as_map(pp.lower) == oracle::window_scan("ACGTACGT", 2));

    CHECK_THROWS_AS(build_paired_profile("ACGT", KmerSpec(1)), ConfigError);
}

TEST_CASE("window scan oracle, dense and sparse, conservation") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 60; ++trial) {
        const std::string s = oracle::random_dna(rng, 20 + rng() % 400, trial % 3 == 0 ? 0.03 : 0.0);
        for (int k : {1, 2, 3, 5, 8, 9, 12}) {
            const auto dense = build_profile(s, KmerSpec(k), Accumulation::Dense);
            const auto sparse = build_profile(s, KmerSpec(k), Accumulation::Sparse);
            CHECK(dense == sparse);
            CHECK(as_map(sparse) == oracle::window_scan(s, k));
            CHECK(std::is_sorted(sparse.counts.begin(), sparse.counts.end()));
            std::uint64_t sum = 0;
            for (auto [c, n] : sparse.counts) sum += n;
            CHECK(sum == sparse.total);
            CHECK(sparse.total + sparse.skipped == s.size() - k + 1);
        }
    }
}

TEST_CASE("locality: windows inside a prefix") {
    std::mt19937_64 rng(12);
    const std::string a = oracle::random_dna(rng, 200);
    const std::string b = oracle::random_dna(rng, 150);
    const auto pa = as_map(build_profile(a, KmerSpec(5)));
    const auto pab = as_map(build_profile(a + b, KmerSpec(5)));
    for (auto [c, n] : pa) CHECK(pab.at(c) >= n);
    // Removing the windows that touch b from the concatenation leaves a's profile.
    auto rest = pab;
    for (std::size_t j = a.size() - 4; j + 5 <= a.size() + b.size(); ++j) {
        if (--rest[code((a + b).substr(j, 5))] == 0) rest.erase(code((a + b).substr(j, 5)));
    }
    CHECK(rest == pa);
}

TEST_CASE("matrix rows equal per-sequence profiles, order equivariant") {
    std::mt19937_64 rng(13);
    LabeledDataset ds;
    ds.classes = {"x", "y", "z"};
    for (int i = 0; i < 10; ++i) {
        ds.sequences.push_back({"s" + std::to_string(i), oracle::random_dna(rng, 30 + rng() % 200)});
        ds.labels.push_back(i % 3);
    }
    const auto m = build_matrix(ds, KmerSpec(4), true, 3);
    REQUIRE(m.size() == 10);
    CHECK(m.paired());
    for (std::size_t i = 0; i < 10; ++i) {
        CHECK(m.ids[i] == ds.sequences[i].id);
        CHECK(m.labels[i] == ds.labels[i]);
        CHECK(m.rows[i] == build_profile(ds.sequences[i].residues, KmerSpec(4)));
        CHECK(m.lower[i] == build_profile(ds.sequences[i].residues, KmerSpec(3)));
    }

    std::vector<std::size_t> perm(10);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    LabeledDataset shuffled = ds;
    for (std::size_t i = 0; i < 10; ++i) {
        shuffled.sequences[i] = ds.sequences[perm[i]];
        shuffled.labels[i] = ds.labels[perm[i]];
    }
    const auto ms = build_matrix(shuffled, KmerSpec(4), false, 1);
    CHECK_FALSE(ms.paired());
    for (std::size_t i = 0; i < 10; ++i) CHECK(ms.rows[i] == m.rows[perm[i]]);

    const auto sub = m.subset({2, 0});
    CHECK(sub.ids == std::vector<std::string>{"s2", "s0"});
    CHECK(sub.lower[1] == m.lower[0]);
}

TEST_CASE("matrix errors") {
    LabeledDataset empty;
    CHECK_THROWS(build_matrix(empty, KmerSpec(3), false));
    LabeledDataset ds;
    ds.sequences = {{"long", "ACGTACGT"}, {"tiny", "AC"}};
    ds.labels = {0, 0};
    ds.classes = {"x"};
    try {
        build_matrix(ds, KmerSpec(4), false);
        FAIL("expected an error");
    } catch (const ShortSequenceError& e) {
        CHECK(std::string(e.what()).find("tiny") != std::string::npos);
    }
}

TEST_CASE("fragment matrix ids") {
    std::vector<Fragment> frags = {{"g1", 0, 5, "ACGTA", 1}, {"g2", 1, 0, "TTTTT", 0}};
    const auto m = build_matrix(frags, {"a", "b"}, KmerSpec(3), false);
    CHECK(m.ids == std::vector<std::string>{"g1:5", "g2:0"});
    CHECK(m.labels == std::vector<ClassIndex>{1, 0});
    CHECK(m.classes == std::vector<std::string>{"a", "b"});
}

TEST_CASE("profile dump line") {
    std::ostringstream out;
    write_profile_line(out, "s1", build_profile("AAAC", KmerSpec(2)));
    CHECK(out.str() == "s1\t2\t0:2,1:1\n");
}
