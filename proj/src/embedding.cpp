#include "semeq/embedding.hpp"

#include <cmath>
#include <cstring>

#include "semeq/errors.hpp"
#include "semeq/util.hpp"

namespace semeq {

EmbeddingTable::EmbeddingTable(std::string name, std::size_t dimension)
    : name_(std::move(name)), dimension_(dimension) {
    if (dimension_ == 0) throw ArgumentError("embedding dimension must be positive");
}

void EmbeddingTable::insert(const std::string& token, std::vector<double> vec) {
    index_.emplace(token, rows_.size());
    tokens_.push_back(token);
    rows_.push_back(std::move(vec));
}

std::optional<EmbeddingVector> EmbeddingTable::lookup(const std::string& word) const {
    auto it = index_.find(to_lower_ascii(word));
    if (it == index_.end()) return std::nullopt;
    return rows_[it->second];
}

bool EmbeddingTable::contains(const std::string& word) const {
    return index_.count(to_lower_ascii(word)) != 0;
}

std::uint64_t EmbeddingTable::content_hash() const {
    std::uint64_t h = fnv1a64(name_);
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
        h = fnv1a64(tokens_[i], h);
        h = fnv1a64(rows_[i].data(), rows_[i].size() * sizeof(double), h);
    }
    return h;
}

EmbeddingTable load_table(const std::filesystem::path& path,
                          std::optional<std::size_t> expected_dim,
                          std::vector<std::string>* warnings) {
    std::string text = read_text_file(path);
    EmbeddingTable table(path.filename().string(),
                         expected_dim.value_or(1));
    bool dim_known = false;
    std::size_t dim = expected_dim.value_or(0);

    std::size_t line_no = 0;
    for (const auto& raw : split(text, '\n')) {
        ++line_no;
        std::string line = raw;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;

        // token then floats, single-space separated
        std::vector<std::string> fields = split(line, ' ');
        // collapse accidental empty fields from repeated spaces
        std::erase_if(fields, [](const std::string& f) { return f.empty(); });
        if (fields.size() < 2) {
            throw ParseError("embedding file " + path.string() + " line " +
                             std::to_string(line_no) + ": expected token and values");
        }
        std::string token = to_lower_ascii(fields[0]);
        std::vector<double> vec;
        vec.reserve(fields.size() - 1);
        for (std::size_t i = 1; i < fields.size(); ++i) {
            double v = 0.0;
            if (!parse_double(fields[i], v)) {
                throw ParseError("embedding file " + path.string() + " line " +
                                 std::to_string(line_no) + ": non-numeric component '" +
                                 fields[i] + "'");
            }
            if (!std::isfinite(v)) {
                throw ParseError("embedding file " + path.string() + " line " +
                                 std::to_string(line_no) + ": non-finite component");
            }
            vec.push_back(v);
        }

        if (!dim_known) {
            if (expected_dim && vec.size() != *expected_dim) {
                throw FormatError("embedding file " + path.string() + " line " +
                                  std::to_string(line_no) + ": dimension " +
                                  std::to_string(vec.size()) + " does not match expected " +
                                  std::to_string(*expected_dim));
            }
            dim = vec.size();
            dim_known = true;
            table = EmbeddingTable(path.filename().string(), dim);
        } else if (vec.size() != dim) {
            throw FormatError("embedding file " + path.string() + " line " +
                              std::to_string(line_no) + ": dimension " +
                              std::to_string(vec.size()) + " differs from earlier lines (" +
                              std::to_string(dim) + ")");
        }

        if (table.contains(token)) {
            if (warnings) {
                warnings->push_back("duplicate token '" + token + "' at line " +
                                    std::to_string(line_no) + "; first occurrence kept");
            }
            continue;
        }
        table.insert(token, std::move(vec));
    }

    if (!dim_known) {
        throw FormatError("embedding file " + path.string() + ": no entries");
    }
    return table;
}

std::optional<EmbeddingVector> embed_descriptor(const EmbeddingTable& table,
                                                const std::string& descriptor) {
    std::string d = trim(descriptor);
    if (d.empty()) throw ArgumentError("empty descriptor");

    if (auto direct = table.lookup(d)) return direct;

    // split on hyphens and spaces, average the sub-tokens that resolve
    std::string lowered = to_lower_ascii(d);
    for (char& c : lowered) {
        if (c == '-' || c == '_') c = ' ';
    }
    std::vector<std::string> parts = split_list(lowered, ' ');
    if (parts.size() < 2) return std::nullopt;

    EmbeddingVector sum(table.dimension(), 0.0);
    std::size_t found = 0;
    for (const auto& part : parts) {
        if (auto v = table.lookup(part)) {
            for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += (*v)[i];
            ++found;
        }
    }
    if (found == 0) return std::nullopt;
    for (double& x : sum) x /= static_cast<double>(found);
    return sum;
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw ShapeError("cosine_similarity: length mismatch");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw DomainError("cosine_similarity: zero-norm vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

} // namespace semeq
