#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace afc {

struct Sequence {
    std::string id;
    std::string residues;  // upper-cased; IUPAC ambiguity codes retained

    std::size_t length() const noexcept { return residues.size(); }
    bool operator==(const Sequence&) const = default;
};

using ClassIndex = std::size_t;

// Sequences with one class label each. Labels index into `classes`, which
// holds class names in first-appearance order.
struct LabeledDataset {
    std::vector<Sequence> sequences;
    std::vector<ClassIndex> labels;
    std::vector<std::string> classes;
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return sequences.size(); }
    std::size_t class_count() const noexcept { return classes.size(); }
    std::vector<std::size_t> class_sizes() const;

    // Throws InputError when an invariant does not hold.
    void validate() const;
};

// A window cut from a labeled sequence. `parent` indexes the source
// dataset's sequences.
struct Fragment {
    std::string parent_id;
    std::size_t parent = 0;
    std::size_t offset = 0;
    std::string residues;
    ClassIndex label = 0;
};

struct FragmentSample {
    std::vector<Fragment> fragments;
    std::vector<std::string> warnings;  // classes that produced no fragments
};

// Throws InputError on I/O failure, an empty input (unless allow_empty),
// a record without residues, or a duplicate id.
std::vector<Sequence> parse_fasta(std::istream& in, const std::string& source = "<stream>",
                                  bool allow_empty = false);
std::vector<Sequence> parse_fasta(const std::filesystem::path& path, bool allow_empty = false);

void write_fasta(std::ostream& out, const std::vector<Sequence>& sequences,
                 std::size_t line_width = 70);

struct ManifestOptions {
    char delimiter = '\t';
    bool has_header = false;
    // Strict mode rejects manifest ids without a matching sequence;
    // lenient mode records a warning instead.
    bool strict = false;
};

LabeledDataset load_labels(std::istream& manifest, std::vector<Sequence> sequences,
                           const ManifestOptions& options = {},
                           const std::string& source = "<stream>");
LabeledDataset load_labels(const std::filesystem::path& manifest, std::vector<Sequence> sequences,
                           const ManifestOptions& options = {});

// Draws up to `max_per_class` distinct windows of `fragment_length` per
// class, uniformly over all valid (sequence, offset) pairs of that class.
// Only rows listed in `rows` are eligible (all rows when empty). Output is
// grouped by class, then ordered by parent row and offset.
FragmentSample sample_fragments(const LabeledDataset& dataset, std::size_t fragment_length,
                                std::size_t max_per_class, std::uint64_t seed,
                                const std::vector<std::size_t>& rows = {});

}  // namespace afc
