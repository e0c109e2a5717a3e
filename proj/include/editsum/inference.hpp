#pragma once

#include "editsum/model.hpp"
#include "editsum/retrieval.hpp"
#include "editsum/training.hpp"

#include <memory>
#include <optional>

namespace editsum::inference {

using corpus::Ids;
using corpus::TokenId;
using corpus::Tokens;

struct BeamConfig {
    std::size_t beam_size = 10;
    std::size_t max_len = 15; // emitted tokens, EOS excluded
    TokenId eos = corpus::Vocabulary::kEos;
    TokenId start = corpus::Vocabulary::kBos;
    std::vector<TokenId> banned = {corpus::Vocabulary::kPad, corpus::Vocabulary::kBos};
};

struct Hypothesis {
    Ids tokens;          // without BOS/EOS
    double log_prob = 0; // cumulative
    bool finished = false;

    // log_prob / (tokens + 1 when finished)
    [[nodiscard]] double normalized() const;
};

/// Next-token scorer driven by beam search. Rows of one call are the live
/// hypotheses; `parents[r]` is the row of the previous call the hypothesis
/// extends (0 for the first call, which has a single row).
class Scorer {
  public:
    virtual ~Scorer() = default;
    [[nodiscard]] virtual std::size_t vocab_size() const = 0;
    // Returns [rows, vocab] log-probabilities.
    virtual nn::Matrix<double> step(std::span<const std::int32_t> parents, std::span<const TokenId> last) = 0;
};

/// Keeps the beam_size best expansions by cumulative log-probability each
/// step; a candidate ending in EOS is set aside as finished and leaves the
/// beam. Live hypotheses at max_len count as truncated outputs. The result is
/// ranked by normalized score, ties by raw log-probability then token ids.
/// Throws UsageError for beam_size 0.
std::vector<Hypothesis> beam_search(Scorer& scorer, const BeamConfig& cfg);

/// Argmax decoding (lowest id wins ties) until EOS or max_len.
Hypothesis greedy_decode(Scorer& scorer, const BeamConfig& cfg);

/// Scores continuations of one encoded instance with a model.
template <typename T>
class ModelScorer final : public Scorer {
  public:
    ModelScorer(const model::ModelParameters<T>& params, const model::ModelConfig& cfg,
                const model::EncodedInstance& instance);
    [[nodiscard]] std::size_t vocab_size() const override { return cfg_.summary_vocab_size; }
    nn::Matrix<double> step(std::span<const std::int32_t> parents, std::span<const TokenId> last) override;

    [[nodiscard]] const nn::Matrix<T>& edit_vector() const { return ev_.z.value(); }

  private:
    model::ModelConfig cfg_;
    nn::Tape<T> tape_{false};
    model::Bound<T> w_;
    model::EncoderOutput<T> enc_;
    model::EditVectorResult<T> ev_;
    model::DecoderState<T> state_;
    model::RunContext ctx_;
};

struct Generation {
    Tokens summary;
    Ids ids;
    std::string proto_id;
    double log_prob = 0.0;
    double score = 0.0; // normalized
    std::size_t insertions = 0;
    std::size_t deletions = 0;
    double z_norm = 0.0;
};

/// retrieve_prototype, then encoder, diff sets, edit vector and beam search
/// with the checkpoint's parameters. Thread-safe for concurrent calls.
class Generator {
  public:
    Generator(const training::Checkpoint& ckpt, const retrieval::InvertedIndex& code_index,
              const corpus::DatasetSplit& train);

    [[nodiscard]] Generation generate(std::span<const corpus::Token> code, const BeamConfig& beam,
                                      std::optional<std::string_view> exclude_id = std::nullopt) const;
    /// Decodes with a given prototype instead of retrieving one.
    [[nodiscard]] Generation generate_with(const retrieval::Prototype& proto, std::span<const corpus::Token> code,
                                           const BeamConfig& beam) const;

    /// All inputs in parallel; output order follows `inputs`. When
    /// `exclude_self` is set, each input's own id is excluded from retrieval.
    [[nodiscard]] std::vector<Generation> generate_all(const corpus::DatasetSplit& inputs, const BeamConfig& beam,
                                                       bool exclude_self = false) const;

  private:
    const training::Checkpoint& ckpt_;
    const retrieval::InvertedIndex& index_;
    const corpus::DatasetSplit& train_;
};

} // namespace editsum::inference
