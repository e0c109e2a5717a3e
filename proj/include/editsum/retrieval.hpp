#pragma once

#include "editsum/corpus.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace editsum::retrieval {

using corpus::DatasetSplit;
using corpus::Token;
using corpus::TokenizedPair;
using corpus::Tokens;

enum class Field : std::uint8_t { code = 0, summary = 1 };

Field parse_field(std::string_view name);
std::string_view field_name(Field f);

// Serial runs the same per-pair loop without OpenMP; kept as the reference.
enum class Execution { serial, parallel };

struct Posting {
    std::uint32_t doc; // position in the index's doc table
    std::uint32_t tf;
};

struct RetrievalHit {
    std::string doc_id;
    double score = 0.0;
};

/// Immutable BM25 (Okapi) inverted index.
class InvertedIndex {
  public:
    static constexpr double kDefaultK1 = 1.2;
    static constexpr double kDefaultB = 0.75;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

    [[nodiscard]] Field field() const { return field_; }
    [[nodiscard]] double k1() const { return k1_; }
    [[nodiscard]] double b() const { return b_; }
    [[nodiscard]] std::size_t n_docs() const { return doc_ids_.size(); }
    [[nodiscard]] std::size_t n_terms() const { return postings_.size(); }
    [[nodiscard]] double avg_doc_len() const { return avg_len_; }
    [[nodiscard]] const std::string& doc_id(std::size_t doc) const { return doc_ids_[doc]; }
    [[nodiscard]] std::uint32_t doc_len(std::size_t doc) const { return doc_len_[doc]; }
    // Doc-table position of `id`, or npos.
    [[nodiscard]] std::size_t doc_index(std::string_view id) const;
    // Empty when the term is absent. Sorted by doc.
    [[nodiscard]] std::span<const Posting> postings(std::string_view term) const;
    [[nodiscard]] std::size_t document_frequency(std::string_view term) const {
        return postings(term).size();
    }
    // ln((N - n + 0.5) / (n + 0.5) + 1)
    [[nodiscard]] double idf(std::string_view term) const;
    // All indexed terms in ascending order.
    [[nodiscard]] std::vector<Token> terms() const;

    void save(const std::filesystem::path& path) const;
    static InvertedIndex load(const std::filesystem::path& path);
    [[nodiscard]] std::string serialize() const;
    static InvertedIndex deserialize(std::string_view bytes);

    // Per-occurrence contribution of a term with the given idf to a doc.
    [[nodiscard]] double term_weight(double idf, std::uint32_t tf, std::uint32_t len) const;

    friend InvertedIndex build_index(std::span<const TokenizedPair>, Field, double, double);

  private:
    void finish();

    Field field_ = Field::code;
    double k1_ = kDefaultK1;
    double b_ = kDefaultB;
    double avg_len_ = 0.0;
    std::vector<std::string> doc_ids_;
    std::vector<std::uint32_t> doc_len_;
    std::unordered_map<std::string, std::uint32_t> id_to_doc_;
    std::unordered_map<Token, std::vector<Posting>> postings_;
};

/// Throws EmptyCorpus when `pairs` is empty and DataError on duplicate ids.
InvertedIndex build_index(std::span<const TokenizedPair> pairs, Field field,
                          double k1 = InvertedIndex::kDefaultK1, double b = InvertedIndex::kDefaultB);

/// Sum over query tokens (repeats count again) of IDF(t) * tf (k1+1) /
/// (tf + k1 (1 - b + b len/avg_len)). Throws UnknownDoc.
double bm25_score(const InvertedIndex& index, std::span<const Token> query, std::string_view doc_id);

/// Up to k docs with positive score, best first, ties by ascending id.
std::vector<RetrievalHit> query_top_k(const InvertedIndex& index, std::span<const Token> query,
                                      std::size_t k,
                                      std::optional<std::string_view> exclude_id = std::nullopt);

/// |A n B| / |A u B| on de-duplicated tokens; 0 when both are empty.
double jaccard(std::span<const Token> a, std::span<const Token> b);

/// Token-level instance; the training code maps tokens to vocabulary ids.
struct TrainingInstance {
    std::string src_id;
    std::string proto_id;
    Tokens x;       // input code
    Tokens y;       // target summary
    Tokens x_prime; // similar code
    Tokens y_prime; // prototype summary

    friend bool operator==(const TrainingInstance&, const TrainingInstance&) = default;
};

struct PairConfig {
    std::size_t top_k = 20;
    double j_min = 0.3;
    double j_max = 0.7;
};

/// Summary-similarity construction: every train pair queries
/// `summary_index` with its own summary (self excluded by id) and keeps the
/// hits whose summary Jaccard with the target lies in [j_min, j_max].
/// Output is ordered by (position in `train`, hit rank).
std::vector<TrainingInstance> build_training_instances(const DatasetSplit& train,
                                                       const InvertedIndex& summary_index,
                                                       const PairConfig& config = {},
                                                       Execution exec = Execution::parallel);

struct Prototype {
    std::string id;
    Tokens code;
    Tokens summary;
    double score = 0.0;
};

/// Top-1 code-similarity hit among the training pairs. When nothing shares a
/// term with the input, falls back to the training pair with the smallest id.
/// Throws EmptyIndex.
Prototype retrieve_prototype(const InvertedIndex& code_index, const DatasetSplit& train,
                             std::span<const Token> input_code_tokens,
                             std::optional<std::string_view> exclude_id = std::nullopt);

/// Code-similarity construction: one instance per query pair, prototype from
/// retrieve_prototype. Used for validation and test splits, and for training
/// when the code mode is selected (then `exclude_self` drops the own id).
std::vector<TrainingInstance> build_code_instances(const DatasetSplit& queries,
                                                   const DatasetSplit& train,
                                                   const InvertedIndex& code_index,
                                                   bool exclude_self,
                                                   Execution exec = Execution::parallel);

/// JSONL, one instance per line: x, y, x_prime, y_prime, src_id, proto_id.
void write_instances(const std::filesystem::path& path, std::span<const TrainingInstance> instances);
std::vector<TrainingInstance> read_instances(const std::filesystem::path& path);

/// TF-IDF cosine space over training code: raw tf times the smoothed idf
/// ln((1 + N) / (1 + df)) + 1.
class VsmModel {
  public:
    explicit VsmModel(const DatasetSplit& train);

    struct Neighbor {
        std::size_t pair; // position in the training split
        double cosine;
    };
    /// The k most similar training codes (cosine desc, id asc); zero-score
    /// docs are included so the result always has min(k, N) entries.
    [[nodiscard]] std::vector<Neighbor> nearest(std::span<const Token> query, std::size_t k) const;
    [[nodiscard]] double idf(std::string_view term) const;
    [[nodiscard]] const DatasetSplit& train() const { return *train_; }

  private:
    struct Entry {
        std::uint32_t doc;
        double weight;
    };
    const DatasetSplit* train_;
    std::unordered_map<Token, std::vector<Entry>> postings_;
    std::unordered_map<Token, double> idf_;
    std::vector<double> norm_;
    std::vector<std::size_t> by_id_; // split positions sorted by id
    std::vector<std::size_t> rank_;  // split position -> rank in by_id_
};

/// Summary of the cosine-nearest training code.
Tokens vsm_retrieve(const VsmModel& model, std::span<const Token> input_code_tokens);
Tokens vsm_retrieve(const DatasetSplit& train, std::span<const Token> input_code_tokens);

/// Among the k cosine-nearest codes, the summary of the one whose code has
/// the highest smoothed sentence BLEU-4 against the input (earlier neighbor
/// wins ties).
Tokens nngen_select(const VsmModel& model, std::span<const Token> input_code_tokens,
                    std::size_t k = 5);
Tokens nngen_select(const DatasetSplit& train, std::span<const Token> input_code_tokens,
                    std::size_t k = 5);

} // namespace editsum::retrieval
