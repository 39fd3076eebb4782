#include "afc/kmer_features.hpp"

#include <algorithm>
#include <ostream>
#include <unordered_map>

#include "afc/error.hpp"
#include "afc/parallel.hpp"

namespace afc {

KmerSpec::KmerSpec(int k) : k_(k) {
    if (k < kMinK || k > kMaxK) {
        throw ConfigError("k must lie in [" + std::to_string(kMinK) + ", " +
                          std::to_string(kMaxK) + "], got " + std::to_string(k));
    }
}

std::optional<KmerCode> kmer_index(std::string_view word) noexcept {
    KmerCode code = 0;
    for (char c : word) {
        const int b = base_code(c);
        if (b < 0) return std::nullopt;
        code = (code << 2) | static_cast<KmerCode>(b);
    }
    return code;
}

std::string kmer_word(KmerCode code, int k) {
    static constexpr char kBases[] = {'A', 'C', 'G', 'T'};
    std::string word(static_cast<std::size_t>(k), 'A');
    for (int i = k - 1; i >= 0; --i) {
        word[static_cast<std::size_t>(i)] = kBases[code & 3U];
        code >>= 2;
    }
    return word;
}

std::uint32_t KmerProfile::count(KmerCode code) const noexcept {
    const auto it = std::lower_bound(counts.begin(), counts.end(), code,
                                     [](const Entry& e, KmerCode c) { return e.first < c; });
    return (it != counts.end() && it->first == code) ? it->second : 0;
}

namespace {

// Calls emit(code) for every clean window, returns the number of windows
// skipped because they overlap a non-ACGT byte.
template <typename Emit>
std::uint64_t scan_windows(std::string_view residues, int k, Emit&& emit) {
    const KmerCode mask = (k == 32) ? ~KmerCode{0} : ((KmerCode{1} << (2 * k)) - 1);
    KmerCode code = 0;
    int valid = 0;  // clean bases ending at the current position
    std::uint64_t skipped = 0;
    for (std::size_t pos = 0; pos < residues.size(); ++pos) {
        const int b = base_code(residues[pos]);
        if (b < 0) {
            valid = 0;
        } else {
            code = ((code << 2) | static_cast<KmerCode>(b)) & mask;
            ++valid;
        }
        if (pos + 1 < static_cast<std::size_t>(k)) continue;
        if (valid >= k) {
            emit(code);
        } else {
            ++skipped;
        }
    }
    return skipped;
}

KmerProfile accumulate_dense(std::string_view residues, KmerSpec spec) {
    thread_local std::vector<std::uint32_t> table;
    thread_local std::vector<KmerCode> touched;
    table.assign(spec.vocabulary_size(), 0);
    touched.clear();

    KmerProfile profile{spec, {}, 0, 0};
    profile.skipped = scan_windows(residues, spec.k(), [&](KmerCode code) {
        if (table[code]++ == 0) touched.push_back(code);
        ++profile.total;
    });
    std::sort(touched.begin(), touched.end());
    profile.counts.reserve(touched.size());
    for (KmerCode code : touched) profile.counts.emplace_back(code, table[code]);
    return profile;
}

KmerProfile accumulate_sparse(std::string_view residues, KmerSpec spec) {
    std::unordered_map<KmerCode, std::uint32_t> table;
    table.reserve(residues.size());
    KmerProfile profile{spec, {}, 0, 0};
    profile.skipped = scan_windows(residues, spec.k(), [&](KmerCode code) {
        ++table[code];
        ++profile.total;
    });
    profile.counts.assign(table.begin(), table.end());
    std::sort(profile.counts.begin(), profile.counts.end());
    return profile;
}

}  // namespace

KmerProfile build_profile(std::string_view residues, KmerSpec spec, Accumulation strategy) {
    if (residues.size() < static_cast<std::size_t>(spec.k())) {
        throw ShortSequenceError("sequence of length " + std::to_string(residues.size()) +
                                 " is shorter than k=" + std::to_string(spec.k()));
    }
    if (strategy == Accumulation::Auto) {
        strategy = spec.k() <= kDenseMaxK ? Accumulation::Dense : Accumulation::Sparse;
    }
    return strategy == Accumulation::Dense ? accumulate_dense(residues, spec)
                                           : accumulate_sparse(residues, spec);
}

PairedProfile build_paired_profile(std::string_view residues, KmerSpec spec,
                                   Accumulation strategy) {
    if (spec.k() < 2) throw ConfigError("paired profiles need k >= 2");
    return PairedProfile{build_profile(residues, spec, strategy),
                         build_profile(residues, KmerSpec(spec.k() - 1), strategy)};
}

ProfileMatrix ProfileMatrix::subset(const std::vector<std::size_t>& positions) const {
    ProfileMatrix out;
    out.spec = spec;
    out.classes = classes;
    out.ids.reserve(positions.size());
    out.rows.reserve(positions.size());
    out.labels.reserve(positions.size());
    for (std::size_t pos : positions) {
        out.ids.push_back(ids.at(pos));
        out.rows.push_back(rows.at(pos));
        out.labels.push_back(labels.at(pos));
        if (paired()) out.lower.push_back(lower.at(pos));
    }
    return out;
}

namespace {

template <typename ResiduesOf>
ProfileMatrix build_rows(std::size_t count, ResiduesOf&& residues_of,
                         const std::vector<std::string>& ids, KmerSpec spec, bool paired,
                         std::size_t workers) {
    if (count == 0) throw ConfigError("cannot build a k-mer matrix from zero sequences");
    if (paired && spec.k() < 2) throw ConfigError("paired profiles need k >= 2");
    ProfileMatrix matrix;
    matrix.spec = spec;
    matrix.ids = ids;
    matrix.rows.resize(count);
    if (paired) matrix.lower.resize(count);
    parallel_for(count, workers, [&](std::size_t i) {
        const std::string_view residues = residues_of(i);
        try {
            matrix.rows[i] = build_profile(residues, spec);
            if (paired) matrix.lower[i] = build_profile(residues, KmerSpec(spec.k() - 1));
        } catch (const ShortSequenceError& e) {
            throw ShortSequenceError("'" + ids[i] + "': " + e.what());
        }
    });
    return matrix;
}

}  // namespace

ProfileMatrix build_matrix(const LabeledDataset& dataset, KmerSpec spec, bool paired,
                           std::size_t workers) {
    std::vector<std::string> ids;
    ids.reserve(dataset.size());
    for (const auto& seq : dataset.sequences) ids.push_back(seq.id);
    ProfileMatrix matrix = build_rows(
        dataset.size(), [&](std::size_t i) { return std::string_view(dataset.sequences[i].residues); },
        ids, spec, paired, workers);
    matrix.labels = dataset.labels;
    matrix.classes = dataset.classes;
    return matrix;
}

ProfileMatrix build_matrix(const std::vector<Fragment>& fragments,
                           const std::vector<std::string>& classes, KmerSpec spec, bool paired,
                           std::size_t workers) {
    std::vector<std::string> ids;
    ids.reserve(fragments.size());
    for (const auto& f : fragments) ids.push_back(f.parent_id + ":" + std::to_string(f.offset));
    ProfileMatrix matrix = build_rows(
        fragments.size(), [&](std::size_t i) { return std::string_view(fragments[i].residues); },
        ids, spec, paired, workers);
    matrix.labels.reserve(fragments.size());
    for (const auto& f : fragments) matrix.labels.push_back(f.label);
    matrix.classes = classes;
    return matrix;
}

void write_profile_line(std::ostream& out, const std::string& id, const KmerProfile& profile) {
    out << id << '\t' << profile.spec.k() << '\t';
    bool first = true;
    for (const auto& [code, count] : profile.counts) {
        if (!first) out << ',';
        out << code << ':' << count;
        first = false;
    }
    out << '\n';
}

}  // namespace afc
