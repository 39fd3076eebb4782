#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "afc/seq_io.hpp"

namespace afc {

using KmerCode = std::uint64_t;

// Word length k and the size of its vocabulary, 4^k.
class KmerSpec {
  public:
    static constexpr int kMinK = 1;
    static constexpr int kMaxK = 31;

    explicit KmerSpec(int k);

    int k() const noexcept { return k_; }
    std::uint64_t vocabulary_size() const noexcept { return std::uint64_t{1} << (2 * k_); }
    bool operator==(const KmerSpec&) const = default;

  private:
    int k_;
};

// 2-bit code of a nucleotide (A=0, C=1, G=2, T=3); -1 for any other byte.
constexpr int base_code(char c) noexcept {
    switch (c) {
        case 'A': return 0;
        case 'C': return 1;
        case 'G': return 2;
        case 'T': return 3;
        default: return -1;
    }
}

// Most-significant-base-first encoding; nullopt if the word holds a
// non-ACGT byte.
std::optional<KmerCode> kmer_index(std::string_view word) noexcept;
std::string kmer_word(KmerCode code, int k);

// Sparse count vector over the 4^k vocabulary. Entries are sorted by code
// and every stored count is >= 1.
struct KmerProfile {
    using Entry = std::pair<KmerCode, std::uint32_t>;

    KmerSpec spec{1};
    std::vector<Entry> counts;
    std::uint64_t total = 0;    // counted windows, == sum of counts
    std::uint64_t skipped = 0;  // windows rejected for non-ACGT bytes

    std::uint32_t count(KmerCode code) const noexcept;
    bool operator==(const KmerProfile&) const = default;
};

// Profiles at k and k-1 computed from the same residues.
struct PairedProfile {
    KmerProfile upper;
    KmerProfile lower;
};

enum class Accumulation { Auto, Dense, Sparse };

// Largest k counted in a dense 4^k array under Accumulation::Auto.
inline constexpr int kDenseMaxK = 8;

// Counts every length-k window free of non-ACGT bytes. Throws
// ShortSequenceError when the residues are shorter than k.
KmerProfile build_profile(std::string_view residues, KmerSpec spec,
                          Accumulation strategy = Accumulation::Auto);

// Requires k >= 2.
PairedProfile build_paired_profile(std::string_view residues, KmerSpec spec,
                                   Accumulation strategy = Accumulation::Auto);

// One profile per item, in input order. `lower` is filled only for paired
// matrices and holds the (k-1)-mer profiles.
struct ProfileMatrix {
    KmerSpec spec{1};
    std::vector<std::string> ids;
    std::vector<KmerProfile> rows;
    std::vector<KmerProfile> lower;
    std::vector<ClassIndex> labels;
    std::vector<std::string> classes;

    bool paired() const noexcept { return !lower.empty(); }
    std::size_t size() const noexcept { return rows.size(); }

    // Rows at the given positions, in the given order.
    ProfileMatrix subset(const std::vector<std::size_t>& positions) const;
};

ProfileMatrix build_matrix(const LabeledDataset& dataset, KmerSpec spec, bool paired,
                           std::size_t workers = 1);
ProfileMatrix build_matrix(const std::vector<Fragment>& fragments,
                           const std::vector<std::string>& classes, KmerSpec spec, bool paired,
                           std::size_t workers = 1);

// `id<TAB>k<TAB>code:count,code:count,...` with codes ascending.
void write_profile_line(std::ostream& out, const std::string& id, const KmerProfile& profile);

}  // namespace afc
