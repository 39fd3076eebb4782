#include "afc/seq_io.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <numeric>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include "afc/error.hpp"
#include "afc/random.hpp"

namespace afc {

namespace {

void strip_cr(std::string& line) {
    while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) line.pop_back();
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

}  // namespace

std::vector<std::size_t> LabeledDataset::class_sizes() const {
    std::vector<std::size_t> sizes(classes.size(), 0);
    for (ClassIndex label : labels) ++sizes.at(label);
    return sizes;
}

void LabeledDataset::validate() const {
    if (sequences.size() != labels.size()) {
        throw InputError("dataset has " + std::to_string(sequences.size()) + " sequences but " +
                         std::to_string(labels.size()) + " labels");
    }
    std::unordered_set<std::string_view> seen;
    for (const auto& seq : sequences) {
        if (seq.id.empty()) throw InputError("sequence with empty id");
        if (seq.residues.empty()) throw InputError("sequence '" + seq.id + "' is empty");
        if (!seen.insert(seq.id).second) throw InputError("duplicate sequence id '" + seq.id + "'");
    }
    const auto sizes = class_sizes();
    for (std::size_t c = 0; c < sizes.size(); ++c) {
        if (sizes[c] == 0) throw InputError("class '" + classes[c] + "' has no members");
    }
}

std::vector<Sequence> parse_fasta(std::istream& in, const std::string& source, bool allow_empty) {
    std::vector<Sequence> records;
    std::unordered_set<std::string> ids;
    std::string line;
    bool any_content = false;

    auto close_record = [&] {
        if (records.empty()) return;
        if (records.back().residues.empty()) {
            throw InputError(source + ": record '" + records.back().id + "' has an empty sequence");
        }
    };

    while (std::getline(in, line)) {
        strip_cr(line);
        if (line.empty()) continue;
        any_content = true;
        if (line.front() == '>') {
            close_record();
            std::string_view header = trim(std::string_view(line).substr(1));
            const auto space = header.find_first_of(" \t");
            std::string id(header.substr(0, space));
            if (id.empty()) throw InputError(source + ": record with empty identifier");
            if (!ids.insert(id).second) throw InputError(source + ": duplicate id '" + id + "'");
            records.push_back(Sequence{std::move(id), {}});
            continue;
        }
        if (records.empty()) throw InputError(source + ": sequence data before first '>' header");
        auto& residues = records.back().residues;
        for (char c : line) {
            if (std::isspace(static_cast<unsigned char>(c))) continue;
            residues.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
        }
    }
    if (in.bad()) throw InputError(source + ": read failure");
    if (!any_content) {
        if (allow_empty) return records;
        throw InputError(source + ": empty FASTA input");
    }
    close_record();
    return records;
}

std::vector<Sequence> parse_fasta(const std::filesystem::path& path, bool allow_empty) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open FASTA file '" + path.string() + "'");
    return parse_fasta(in, path.string(), allow_empty);
}

void write_fasta(std::ostream& out, const std::vector<Sequence>& sequences, std::size_t line_width) {
    if (line_width == 0) line_width = std::string::npos;
    for (const auto& seq : sequences) {
        out << '>' << seq.id << '\n';
        for (std::size_t pos = 0; pos < seq.residues.size(); pos += line_width) {
            out << std::string_view(seq.residues).substr(pos, line_width) << '\n';
        }
    }
}

LabeledDataset load_labels(std::istream& manifest, std::vector<Sequence> sequences,
                           const ManifestOptions& options, const std::string& source) {
    std::unordered_map<std::string, std::string> label_of;
    std::vector<std::string> manifest_order;
    std::string line;
    std::size_t line_no = 0;
    bool header_pending = options.has_header;
    while (std::getline(manifest, line)) {
        ++line_no;
        strip_cr(line);
        if (trim(line).empty()) continue;
        if (header_pending) {
            header_pending = false;
            continue;
        }
        const auto split = line.find(options.delimiter);
        if (split == std::string::npos) {
            throw InputError(source + ":" + std::to_string(line_no) + ": expected two columns");
        }
        std::string id(trim(std::string_view(line).substr(0, split)));
        std::string label(trim(std::string_view(line).substr(split + 1)));
        if (id.empty() || label.empty()) {
            throw InputError(source + ":" + std::to_string(line_no) + ": empty id or label");
        }
        auto [it, inserted] = label_of.emplace(id, label);
        if (!inserted) {
            if (it->second != label) {
                throw InputError(source + ": id '" + id + "' has conflicting labels");
            }
            continue;
        }
        manifest_order.push_back(std::move(id));
    }
    if (manifest.bad()) throw InputError(source + ": read failure");

    LabeledDataset dataset;
    std::unordered_map<std::string, ClassIndex> class_index;
    std::unordered_set<std::string> matched;
    for (auto& seq : sequences) {
        const auto found = label_of.find(seq.id);
        if (found == label_of.end()) {
            throw InputError(source + ": sequence '" + seq.id + "' has no label in the manifest");
        }
        auto [cls, added] = class_index.emplace(found->second, dataset.classes.size());
        if (added) dataset.classes.push_back(found->second);
        dataset.labels.push_back(cls->second);
        matched.insert(seq.id);
        dataset.sequences.push_back(std::move(seq));
    }
    for (const auto& id : manifest_order) {
        if (matched.count(id)) continue;
        const std::string message = source + ": manifest id '" + id + "' has no matching sequence";
        if (options.strict) throw InputError(message);
        dataset.warnings.push_back(message);
    }
    dataset.validate();
    return dataset;
}

LabeledDataset load_labels(const std::filesystem::path& manifest, std::vector<Sequence> sequences,
                           const ManifestOptions& options) {
    std::ifstream in(manifest);
    if (!in) throw InputError("cannot open label manifest '" + manifest.string() + "'");
    return load_labels(in, std::move(sequences), options, manifest.string());
}

FragmentSample sample_fragments(const LabeledDataset& dataset, std::size_t fragment_length,
                                std::size_t max_per_class, std::uint64_t seed,
                                const std::vector<std::size_t>& rows) {
    if (fragment_length < 1) throw ConfigError("fragment length must be at least 1");
    if (max_per_class < 1) throw ConfigError("max fragments per class must be at least 1");
    if (dataset.size() == 0) throw ConfigError("cannot sample fragments from an empty dataset");

    std::vector<std::size_t> eligible = rows;
    if (eligible.empty()) {
        eligible.resize(dataset.size());
        std::iota(eligible.begin(), eligible.end(), std::size_t{0});
    }

    std::vector<std::vector<std::size_t>> members(dataset.class_count());
    for (std::size_t row : eligible) members.at(dataset.labels.at(row)).push_back(row);

    FragmentSample sample;
    for (ClassIndex cls = 0; cls < members.size(); ++cls) {
        if (members[cls].empty()) continue;
        // Cumulative count of valid offsets; row r owns [start[r], start[r+1]).
        std::vector<std::size_t> rows_used;
        std::vector<std::uint64_t> start{0};
        for (std::size_t row : members[cls]) {
            const std::size_t len = dataset.sequences[row].length();
            if (len < fragment_length) continue;
            rows_used.push_back(row);
            start.push_back(start.back() + (len - fragment_length + 1));
        }
        const std::uint64_t pool = start.back();
        if (pool == 0) {
            sample.warnings.push_back("class '" + dataset.classes[cls] +
                                      "' has no sequence of at least " +
                                      std::to_string(fragment_length) + " nt; no fragments drawn");
            continue;
        }
        const std::uint64_t want = std::min<std::uint64_t>(max_per_class, pool);

        // Floyd's algorithm: `want` distinct positions from [0, pool).
        Rng rng(derive_seed(seed, cls));
        std::unordered_set<std::uint64_t> chosen;
        chosen.reserve(want * 2);
        for (std::uint64_t j = pool - want; j < pool; ++j) {
            const std::uint64_t t = rng.below(j + 1);
            if (!chosen.insert(t).second) chosen.insert(j);
        }
        std::vector<std::uint64_t> picks(chosen.begin(), chosen.end());
        std::sort(picks.begin(), picks.end());

        for (std::uint64_t pick : picks) {
            const auto slot = static_cast<std::size_t>(
                std::upper_bound(start.begin(), start.end(), pick) - start.begin() - 1);
            const std::size_t row = rows_used[slot];
            const auto offset = static_cast<std::size_t>(pick - start[slot]);
            const Sequence& parent = dataset.sequences[row];
            sample.fragments.push_back(Fragment{parent.id, row, offset,
                                                parent.residues.substr(offset, fragment_length),
                                                cls});
        }
    }
    return sample;
}

}  // namespace afc
