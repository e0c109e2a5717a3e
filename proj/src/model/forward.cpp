#include "editsum/error.hpp"
#include "editsum/model.hpp"

#include <numeric>

namespace editsum::model {

namespace {

template <typename T>
Var<T> drop(Var<T> a, const ModelConfig& cfg, RunContext& ctx) {
    if (!ctx.train || cfg.dropout_p == 0.0) return a;
    if (!ctx.rng) throw UsageError("training forward pass needs an rng for dropout");
    return nn::dropout(a, cfg.dropout_p, true, *ctx.rng);
}

template <typename T>
Var<T> zeros(Tape<T>& tape, std::size_t rows, std::size_t cols) {
    return tape.constant(Matrix<T>(rows, cols));
}

// [rows, 1] column from a 0/1 mask, and its complement.
template <typename T>
std::pair<Var<T>, Var<T>> mask_columns(Tape<T>& tape, std::span<const std::uint8_t> m) {
    Matrix<T> keep(m.size(), 1), hold(m.size(), 1);
    for (std::size_t i = 0; i < m.size(); ++i) {
        keep[i] = m[i] ? T(1) : T(0);
        hold[i] = m[i] ? T(0) : T(1);
    }
    return {tape.constant(std::move(keep)), tape.constant(std::move(hold))};
}

// Runs one LSTM direction over the prototype; padded steps keep the state.
template <typename T>
std::vector<Var<T>> run_direction(const nn::LstmWeights<T>& lw, const std::vector<Var<T>>& inputs,
                                  const std::vector<std::pair<Var<T>, Var<T>>>& masks, std::size_t batch,
                                  std::size_t hidden, bool reverse) {
    Tape<T>& tape = *inputs.front().tape;
    Var<T> h = zeros(tape, batch, hidden), c = zeros(tape, batch, hidden);
    std::vector<Var<T>> out(inputs.size());
    const std::size_t L = inputs.size();
    for (std::size_t k = 0; k < L; ++k) {
        const std::size_t t = reverse ? L - 1 - k : k;
        const auto st = nn::lstm_cell(inputs[t], h, c, lw);
        const auto& [keep, hold] = masks[t];
        h = add(mul_col(st.h, keep), mul_col(h, hold));
        c = add(mul_col(st.c, keep), mul_col(c, hold));
        out[t] = h;
    }
    return out;
}

// Attention-weighted sum of code embeddings for one diff set.
template <typename T>
std::pair<Var<T>, Var<T>> attend_set(Var<T> Phi, Var<T> W_w, Var<T> W_h, Var<T> v, Var<T> h_final,
                                     std::span<const std::int32_t> ids, std::span<const std::uint8_t> mask,
                                     std::size_t batch, std::size_t set_len, const ModelConfig& cfg,
                                     RunContext& ctx) {
    Tape<T>& tape = *Phi.tape;
    if (set_len == 0) return {zeros(tape, batch, Phi.cols()), zeros(tape, batch, 0)};
    auto E = drop(nn::gather_rows(Phi, ids), cfg, ctx); // [B*n, Ec]
    std::vector<std::int32_t> owner(batch * set_len);
    for (std::size_t i = 0; i < owner.size(); ++i) owner[i] = static_cast<std::int32_t>(i / set_len);
    auto pre = add(matmul(E, W_w), nn::gather_rows(matmul(h_final, W_h), owner));
    auto scores = nn::reshape(matmul(tanh(pre), v), batch, set_len);
    auto weights = nn::masked_softmax_rows(scores, mask);
    auto summed = nn::group_sum_rows(mul_col(E, nn::reshape(weights, batch * set_len, 1)), set_len);
    return {summed, weights};
}

bool is_identity(std::span<const std::int32_t> rows, std::size_t batch) {
    if (rows.size() != batch) return false;
    for (std::size_t i = 0; i < rows.size(); ++i)
        if (rows[i] != static_cast<std::int32_t>(i)) return false;
    return true;
}

} // namespace

template <typename T>
Bound<T> bind(Tape<T>& tape, ModelParameters<T>& p, const ModelConfig& cfg) {
    const std::size_t Ec = cfg.code_embed_dim, He2 = 2 * cfg.encoder_hidden;
    Bound<T> w;
    w.W_e = tape.param(p.W_e);
    w.Phi = tape.param(p.Phi);
    w.enc_fwd = {tape.param(p.enc_fwd_w), tape.param(p.enc_fwd_b)};
    w.enc_bwd = {tape.param(p.enc_bwd_w), tape.param(p.enc_bwd_b)};
    w.dec = {tape.param(p.dec_w), tape.param(p.dec_b)};
    auto Wa = tape.param(p.W_alpha);
    w.W_alpha_w = slice_rows(Wa, 0, Ec);
    w.W_alpha_h = slice_rows(Wa, Ec, Ec + He2);
    w.v_alpha = tape.param(p.v_alpha);
    auto Wb = tape.param(p.W_beta);
    w.W_beta_w = slice_rows(Wb, 0, Ec);
    w.W_beta_h = slice_rows(Wb, Ec, Ec + He2);
    w.v_beta = tape.param(p.v_beta);
    w.W_z = tape.param(p.W_z);
    w.b_z = tape.param(p.b_z);
    w.W_init = tape.param(p.W_init);
    w.b_init = tape.param(p.b_init);
    auto We = tape.param(p.W_eta);
    w.W_eta_h = slice_rows(We, 0, He2);
    w.W_eta_s = slice_rows(We, He2, He2 + cfg.decoder_hidden);
    w.v_eta = tape.param(p.v_eta);
    w.W_p = tape.param(p.W_p);
    w.b_p = tape.param(p.b_p);
    return w;
}

template <typename T>
EncoderOutput<T> encode_prototype(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch,
                                  RunContext& ctx) {
    const std::size_t B = batch.size, L = batch.proto_len, He = cfg.encoder_hidden;
    if (B == 0 || L == 0) throw EmptyPrototype("encode_prototype: empty batch or prototype");
    Tape<T>& tape = *w.W_e.tape;
    std::vector<Var<T>> inputs(L);
    std::vector<std::pair<Var<T>, Var<T>>> masks(L);
    for (std::size_t t = 0; t < L; ++t) {
        const std::span<const std::int32_t> ids(batch.proto_ids.data() + t * B, B);
        inputs[t] = drop(nn::gather_rows(w.W_e, ids), cfg, ctx);
        masks[t] = mask_columns<T>(tape, std::span<const std::uint8_t>(batch.proto_mask.data() + t * B, B));
    }
    const auto fwd = run_direction(w.enc_fwd, inputs, masks, B, He, false);
    const auto bwd = run_direction(w.enc_bwd, inputs, masks, B, He, true);
    std::vector<Var<T>> steps(L);
    for (std::size_t t = 0; t < L; ++t) steps[t] = nn::concat_cols<T>({fwd[t], bwd[t]});
    auto time_major = nn::concat_rows<T>(std::span<const Var<T>>(steps));
    std::vector<std::int32_t> perm(B * L);
    for (std::size_t b = 0; b < B; ++b)
        for (std::size_t t = 0; t < L; ++t) perm[b * L + t] = static_cast<std::int32_t>(t * B + b);
    EncoderOutput<T> out;
    out.batch = B;
    out.length = L;
    out.h_seq = B == 1 ? time_major : nn::gather_rows(time_major, perm);
    out.h_final = nn::gather_rows(out.h_seq, batch.last_position);
    out.memory_proj = matmul(out.h_seq, w.W_eta_h);
    out.mask = batch.memory_mask;
    return out;
}

template <typename T>
EditVectorResult<T> compute_edit_vector(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch,
                                        Var<T> h_final, RunContext& ctx) {
    const std::size_t B = batch.size;
    EditVectorResult<T> r;
    auto [ins, alpha] = attend_set(w.Phi, w.W_alpha_w, w.W_alpha_h, w.v_alpha, h_final, batch.ins_ids,
                                   batch.ins_mask, B, batch.ins_len, cfg, ctx);
    auto [del, beta] = attend_set(w.Phi, w.W_beta_w, w.W_beta_h, w.v_beta, h_final, batch.del_ids,
                                  batch.del_mask, B, batch.del_len, cfg, ctx);
    r.alpha = alpha;
    r.beta = beta;
    r.f_diff = nn::concat_cols<T>({ins, del});
    r.z = tanh(add_row(matmul(r.f_diff, w.W_z), w.b_z));
    return r;
}

template <typename T>
DecoderState<T> initial_state(const Bound<T>& w, Var<T> h_final) {
    auto s = tanh(add_row(matmul(h_final, w.W_init), w.b_init));
    return {s, zeros(*h_final.tape, s.rows(), s.cols())};
}

template <typename T>
StepOutput<T> decode_step(const Bound<T>& w, const ModelConfig& cfg, std::span<const TokenId> y_prev,
                          const DecoderState<T>& prev, Var<T> z, const EncoderOutput<T>& enc,
                          std::span<const std::int32_t> row_instance, RunContext& ctx, bool project) {
    const std::size_t R = y_prev.size(), L = enc.length;
    if (row_instance.size() != R || prev.s.rows() != R)
        throw ShapeMismatch("decode_step: " + std::to_string(R) + " tokens, " +
                            std::to_string(row_instance.size()) + " row mappings, state with " +
                            std::to_string(prev.s.rows()) + " rows");
    for (auto r : row_instance)
        if (r < 0 || static_cast<std::size_t>(r) >= enc.batch)
            throw ShapeMismatch("decode_step: row mapped to instance " + std::to_string(r) + " of " +
                                std::to_string(enc.batch));
    const bool identity = is_identity(row_instance, enc.batch);

    auto emb = drop(nn::gather_rows(w.W_e, y_prev), cfg, ctx);
    auto z_rows = identity ? z : nn::gather_rows(z, row_instance);
    const auto st = nn::lstm_cell(nn::concat_cols<T>({emb, z_rows}), prev.s, prev.c, w.dec);

    std::vector<std::int32_t> mem_rows, state_rows(R * L);
    std::vector<std::uint8_t> mask(R * L);
    if (!identity) mem_rows.resize(R * L);
    for (std::size_t r = 0; r < R; ++r)
        for (std::size_t t = 0; t < L; ++t) {
            const std::size_t src = static_cast<std::size_t>(row_instance[r]) * L + t;
            if (!identity) mem_rows[r * L + t] = static_cast<std::int32_t>(src);
            state_rows[r * L + t] = static_cast<std::int32_t>(r);
            mask[r * L + t] = enc.mask[src];
        }
    auto Mh = identity ? enc.memory_proj : nn::gather_rows(enc.memory_proj, mem_rows);
    auto H = identity ? enc.h_seq : nn::gather_rows(enc.h_seq, mem_rows);
    auto Ss = nn::gather_rows(matmul(st.h, w.W_eta_s), state_rows);
    auto scores = nn::reshape(matmul(tanh(add(Mh, Ss)), w.v_eta), R, L);
    auto eta = nn::masked_softmax_rows(scores, mask);
    auto context = nn::group_sum_rows(mul_col(H, nn::reshape(eta, R * L, 1)), L);

    StepOutput<T> out;
    out.state = DecoderState<T>{st.h, st.c};
    out.context = context;
    out.attention = eta;
    out.proj_input = drop(nn::concat_cols<T>({emb, st.h, context}), cfg, ctx);
    if (project) out.logits = add_row(matmul(out.proj_input, w.W_p), w.b_p);
    return out;
}

template <typename T>
Var<T> forward_loss(const Bound<T>& w, const ModelConfig& cfg, const Batch& batch, RunContext& ctx) {
    const std::size_t B = batch.size, T_len = batch.target_len;
    const auto enc = encode_prototype(w, cfg, batch, ctx);
    const auto ev = compute_edit_vector(w, cfg, batch, enc.h_final, ctx);
    auto state = initial_state(w, enc.h_final);
    std::vector<std::int32_t> rows(B);
    std::iota(rows.begin(), rows.end(), 0);
    std::vector<Var<T>> proj(T_len);
    for (std::size_t t = 0; t < T_len; ++t) {
        const std::span<const TokenId> y_prev(batch.decoder_inputs.data() + t * B, B);
        auto out = decode_step(w, cfg, y_prev, state, ev.z, enc, rows, ctx, false);
        proj[t] = out.proj_input;
        state = out.state;
    }
    auto stacked = T_len == 1 ? proj[0] : nn::concat_rows<T>(std::span<const Var<T>>(proj));
    auto logits = add_row(matmul(stacked, w.W_p), w.b_p);
    return nn::cross_entropy(logits, batch.decoder_targets, batch.target_mask);
}

template <typename T>
double evaluate_loss(ModelParameters<T>& params, const ModelConfig& cfg,
                     std::span<const EncodedInstance> instances, std::size_t batch_size) {
    if (instances.empty()) throw EmptyDataset("evaluate_loss: no instances");
    if (batch_size == 0) throw UsageError("evaluate_loss: batch size must be at least 1");
    double total = 0.0;
    std::size_t tokens = 0;
    for (std::size_t start = 0; start < instances.size(); start += batch_size) {
        const auto chunk = instances.subspan(start, std::min(batch_size, instances.size() - start));
        const auto batch = make_batch(chunk);
        Tape<T> tape(false);
        const auto w = bind(tape, params, cfg);
        RunContext ctx;
        const auto loss = forward_loss(w, cfg, batch, ctx);
        std::size_t n = 0;
        for (auto m : batch.target_mask) n += m;
        total += static_cast<double>(loss.value()[0]) * static_cast<double>(n);
        tokens += n;
    }
    return total / static_cast<double>(tokens);
}

#define EDITSUM_INSTANTIATE_MODEL(T)                                                                  \
    template Bound<T> bind(Tape<T>&, ModelParameters<T>&, const ModelConfig&);                        \
    template EncoderOutput<T> encode_prototype(const Bound<T>&, const ModelConfig&, const Batch&,     \
                                               RunContext&);                                          \
    template EditVectorResult<T> compute_edit_vector(const Bound<T>&, const ModelConfig&,             \
                                                     const Batch&, Var<T>, RunContext&);              \
    template DecoderState<T> initial_state(const Bound<T>&, Var<T>);                                  \
    template StepOutput<T> decode_step(const Bound<T>&, const ModelConfig&, std::span<const TokenId>, \
                                       const DecoderState<T>&, Var<T>, const EncoderOutput<T>&,       \
                                       std::span<const std::int32_t>, RunContext&, bool);             \
    template Var<T> forward_loss(const Bound<T>&, const ModelConfig&, const Batch&, RunContext&);     \
    template double evaluate_loss(ModelParameters<T>&, const ModelConfig&,                            \
                                  std::span<const EncodedInstance>, std::size_t);

EDITSUM_INSTANTIATE_MODEL(float)
EDITSUM_INSTANTIATE_MODEL(double)

#undef EDITSUM_INSTANTIATE_MODEL

} // namespace editsum::model
