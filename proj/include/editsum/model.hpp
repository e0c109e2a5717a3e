#pragma once

// The Edit module: a Bi-LSTM prototype encoder, an edit vector built from the
// insertion/deletion word sets of the two code snippets, and an LSTM decoder
// that attends over the prototype while conditioned on the edit vector.
//
// Everything runs on batches. Rows of decoder-side tensors can be mapped onto
// encoder instances (`row_instance`), which is how beam search decodes many
// hypotheses of one input at once.

#include "editsum/config.hpp"
#include "editsum/corpus.hpp"
#include "editsum/nn.hpp"
#include "editsum/retrieval.hpp"

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace editsum::model {

using corpus::Ids;
using corpus::TokenId;
using corpus::Tokens;
using corpus::Vocabulary;
using nn::Matrix;
using nn::Parameter;
using nn::Rng;
using nn::Tape;
using nn::Var;

struct ModelConfig {
    std::size_t summary_embed_dim = 300;
    std::size_t code_embed_dim = 300;
    std::size_t encoder_hidden = 512; // per direction
    std::size_t decoder_hidden = 512;
    std::size_t edit_vector_dim = 128;
    std::size_t attention_dim = 0; // 0: same as decoder_hidden
    std::size_t summary_vocab_size = 0;
    std::size_t code_vocab_size = 0;
    std::size_t max_summary_len = corpus::kDefaultMaxSummaryLen;
    std::size_t max_code_len = corpus::kDefaultMaxCodeLen;
    double dropout_p = 0.5;

    // embed 64, hidden 128
    static ModelConfig desk();

    [[nodiscard]] std::size_t attn() const { return attention_dim ? attention_dim : decoder_hidden; }
    // Throws UsageError when a dimension is zero or dropout is outside [0, 1).
    void validate() const;

    // Keys are prefixed with "model." in the flat config.
    [[nodiscard]] config::KeyValues to_kv() const;
    // Returns false for keys this struct does not own.
    bool set(std::string_view key, std::string_view value);

    friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

/// Every trainable array, in declaration order:
/// W_e, Phi, enc_fwd_w, enc_fwd_b, enc_bwd_w, enc_bwd_b, W_alpha, v_alpha,
/// W_beta, v_beta, W_z, b_z, W_init, b_init, dec_w, dec_b, W_eta, v_eta, W_p, b_p.
template <typename T>
struct ModelParameters {
    Parameter<T> W_e;       // [Vs, Es] summary embeddings
    Parameter<T> Phi;       // [Vc, Ec] code embeddings
    Parameter<T> enc_fwd_w; // [Es + He, 4 He]
    Parameter<T> enc_fwd_b; // [1, 4 He]
    Parameter<T> enc_bwd_w;
    Parameter<T> enc_bwd_b;
    Parameter<T> W_alpha; // [Ec + 2 He, A]
    Parameter<T> v_alpha; // [A, 1]
    Parameter<T> W_beta;
    Parameter<T> v_beta;
    Parameter<T> W_z;    // [2 Ec, Z]
    Parameter<T> b_z;    // [1, Z]
    Parameter<T> W_init; // [2 He, Hd]
    Parameter<T> b_init;
    Parameter<T> dec_w; // [Es + Z + Hd, 4 Hd]
    Parameter<T> dec_b;
    Parameter<T> W_eta; // [2 He + Hd, A]
    Parameter<T> v_eta; // [A, 1]
    Parameter<T> W_p;   // [Es + Hd + 2 He, Vs]
    Parameter<T> b_p;   // [1, Vs]

    ModelParameters() = default;
    explicit ModelParameters(const ModelConfig& cfg);

    [[nodiscard]] std::vector<Parameter<T>*> all();
    [[nodiscard]] std::vector<const Parameter<T>*> all() const;
    [[nodiscard]] std::size_t count() const;

    // Glorot for weight matrices, U(-0.08, 0.08) for embeddings, zero biases.
    void initialize(Rng& rng);
    void zero_grad();

    template <typename U>
    [[nodiscard]] ModelParameters<U> cast() const;
};

/// Token-level diff sets, de-duplicated and sorted.
std::pair<Tokens, Tokens> compute_diff_sets(std::span<const corpus::Token> x,
                                            std::span<const corpus::Token> x_prime);

/// One instance mapped to vocabulary ids.
struct EncodedInstance {
    Ids prototype;  // BOS y' EOS
    Ids insertions; // code ids of I
    Ids deletions;  // code ids of D
    Ids target;     // y (no BOS/EOS); empty at inference
};

/// Truncates y and y' to max_summary_len. Throws EmptyPrototype when y' has
/// no tokens.
EncodedInstance encode_instance(const retrieval::TrainingInstance& inst, const Vocabulary& code_vocab,
                                const Vocabulary& summary_vocab, const ModelConfig& cfg);

/// Padded, batch-major arrays for one batch.
struct Batch {
    std::size_t size = 0;
    std::size_t proto_len = 0; // padded prototype length Lp
    std::vector<std::int32_t> proto_ids;       // [Lp * B], time-major (t * B + b)
    std::vector<std::uint8_t> proto_mask;      // [Lp * B], time-major
    std::vector<std::uint8_t> memory_mask;     // [B * Lp], batch-major
    std::vector<std::int32_t> last_position;   // [B] batch-major row of h_n in memory
    std::size_t ins_len = 0;                   // padded |I|
    std::vector<std::int32_t> ins_ids;         // [B * ins_len]
    std::vector<std::uint8_t> ins_mask;
    std::size_t del_len = 0;
    std::vector<std::int32_t> del_ids;
    std::vector<std::uint8_t> del_mask;
    std::size_t target_len = 0;                // T = max |y| + 1
    std::vector<std::int32_t> decoder_inputs;  // [T * B], BOS y
    std::vector<std::int32_t> decoder_targets; // [T * B], y EOS
    std::vector<std::uint8_t> target_mask;     // [T * B]
};

Batch make_batch(std::span<const EncodedInstance* const> instances);
Batch make_batch(std::span<const EncodedInstance> instances);

struct RunContext {
    bool train = false; // enables dropout
    Rng* rng = nullptr; // required when train && dropout_p > 0
};

/// Parameters bound to one tape, with the row blocks of the attention
/// matrices split out.
template <typename T>
struct Bound {
    Var<T> W_e, Phi;
    nn::LstmWeights<T> enc_fwd, enc_bwd, dec;
    Var<T> W_alpha_w, W_alpha_h, v_alpha; // rows for Phi(w) and for h_n
    Var<T> W_beta_w, W_beta_h, v_beta;
    Var<T> W_z, b_z, W_init, b_init;
    Var<T> W_eta_h, W_eta_s, v_eta; // rows for h_j and for s_i
    Var<T> W_p, b_p;
};

template <typename T>
Bound<T> bind(Tape<T>& tape, ModelParameters<T>& params, const ModelConfig& cfg);

template <typename T>
struct EncoderOutput {
    std::size_t batch = 0;
    std::size_t length = 0;    // Lp
    Var<T> h_seq;              // [B * Lp, 2 He], batch-major
    Var<T> h_final;            // [B, 2 He]
    Var<T> memory_proj;        // h_seq W_eta_h, [B * Lp, A]
    std::vector<std::uint8_t> mask; // [B * Lp]
};

template <typename T>
EncoderOutput<T> encode_prototype(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch,
                                  RunContext& ctx);

template <typename T>
struct EditVectorResult {
    Var<T> alpha; // [B, |I|] (empty matrix when no batch row has insertions)
    Var<T> beta;  // [B, |D|]
    Var<T> f_diff; // [B, 2 Ec]
    Var<T> z;      // [B, Z]
};

template <typename T>
EditVectorResult<T> compute_edit_vector(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch,
                                        Var<T> h_final, RunContext& ctx);

template <typename T>
struct DecoderState {
    Var<T> s; // [R, Hd]
    Var<T> c; // [R, Hd]
};

// s_0 = tanh(W_init h_n + b_init), c_0 = 0.
template <typename T>
DecoderState<T> initial_state(const Bound<T>& w, Var<T> h_final);

template <typename T>
struct StepOutput {
    DecoderState<T> state;
    Var<T> context;    // [R, 2 He]
    Var<T> attention;  // [R, Lp]
    Var<T> proj_input; // [R, Es + Hd + 2 He], after dropout
    Var<T> logits;     // [R, Vs]; empty when the step was asked not to project
};

/// One decoder step for R rows; row r reads encoder instance row_instance[r].
template <typename T>
StepOutput<T> decode_step(const Bound<T>& w, const ModelConfig& cfg, std::span<const TokenId> y_prev,
                          const DecoderState<T>& prev, Var<T> z, const EncoderOutput<T>& enc,
                          std::span<const std::int32_t> row_instance, RunContext& ctx,
                          bool project = true);

/// Teacher-forced mean cross-entropy over non-pad target positions.
template <typename T>
Var<T> forward_loss(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch, RunContext& ctx);

/// Convenience: mean loss over `instances` with dropout disabled, processed
/// in chunks of `batch_size`; the result weights every target token equally.
template <typename T>
double evaluate_loss(ModelParameters<T>& params, const ModelConfig& cfg,
                     std::span<const EncodedInstance> instances, std::size_t batch_size);

} // namespace editsum::model
