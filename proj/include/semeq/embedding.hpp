#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace semeq {

using EmbeddingVector = std::vector<double>;

// Read-only word -> vector table loaded from a GloVe-style text file
// (one entry per line: token followed by space-separated decimal floats).
// Tokens are lowercased at load; the table never changes after load, so it
// is safe for concurrent lookup.
class EmbeddingTable {
public:
    EmbeddingTable(std::string name, std::size_t dimension);

    const std::string& name() const { return name_; }
    std::size_t dimension() const { return dimension_; }
    std::size_t size() const { return rows_.size(); }

    // Case-insensitive exact-token lookup; absent means out of vocabulary.
    std::optional<EmbeddingVector> lookup(const std::string& word) const;
    bool contains(const std::string& word) const;

    // All tokens in file order (first occurrence of duplicates).
    const std::vector<std::string>& tokens() const { return tokens_; }

    // Content hash over all tokens and vector bytes, in insertion order.
    std::uint64_t content_hash() const;

private:
    friend EmbeddingTable load_table(const std::filesystem::path&,
                                     std::optional<std::size_t>,
                                     std::vector<std::string>*);
    void insert(const std::string& lowercased_token,
                std::vector<double> vec);

    std::string name_;
    std::size_t dimension_;
    std::vector<std::string> tokens_;              // insertion order
    std::vector<std::vector<double>> rows_;        // parallel to tokens_
    std::unordered_map<std::string, std::size_t> index_;
};

// Parses a text embedding file. Throws ParseError on a non-numeric field
// (naming the line), FormatError if line dimensions disagree, and a
// dimension error if expected_dim is given and violated. Duplicate tokens
// keep the first occurrence; a warning is appended to *warnings if given.
EmbeddingTable load_table(const std::filesystem::path& path,
                          std::optional<std::size_t> expected_dim = {},
                          std::vector<std::string>* warnings = nullptr);

// Resolves a possibly multi-token descriptor ("heart-warming") to a vector:
// the full lowercased token if present, otherwise the component-wise mean
// of whichever hyphen/space-separated sub-tokens are in the vocabulary.
// Absent only when nothing resolves. Empty descriptors are an error.
std::optional<EmbeddingVector> embed_descriptor(const EmbeddingTable& table,
                                                const std::string& descriptor);

// Cosine of the angle between two equal-length nonzero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

} // namespace semeq
