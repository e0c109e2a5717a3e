#include "editsum/error.hpp"
#include "editsum/model.hpp"

#include <algorithm>
#include <set>

namespace editsum::model {

ModelConfig ModelConfig::desk() {
    ModelConfig c;
    c.summary_embed_dim = 64;
    c.code_embed_dim = 64;
    c.encoder_hidden = 128;
    c.decoder_hidden = 128;
    c.edit_vector_dim = 128;
    return c;
}

void ModelConfig::validate() const {
    const std::pair<const char*, std::size_t> dims[] = {
        {"summary_embed_dim", summary_embed_dim}, {"code_embed_dim", code_embed_dim},
        {"encoder_hidden", encoder_hidden},       {"decoder_hidden", decoder_hidden},
        {"edit_vector_dim", edit_vector_dim},     {"summary_vocab_size", summary_vocab_size},
        {"code_vocab_size", code_vocab_size},     {"max_summary_len", max_summary_len},
        {"max_code_len", max_code_len}};
    for (const auto& [name, v] : dims)
        if (v == 0) throw UsageError(std::string("model.") + name + " must be at least 1");
    if (!(dropout_p >= 0.0 && dropout_p < 1.0)) throw UsageError("model.dropout_p must lie in [0, 1)");
}

config::KeyValues ModelConfig::to_kv() const {
    return {
        {"model.summary_embed_dim", std::to_string(summary_embed_dim)},
        {"model.code_embed_dim", std::to_string(code_embed_dim)},
        {"model.encoder_hidden", std::to_string(encoder_hidden)},
        {"model.decoder_hidden", std::to_string(decoder_hidden)},
        {"model.edit_vector_dim", std::to_string(edit_vector_dim)},
        {"model.attention_dim", std::to_string(attention_dim)},
        {"model.summary_vocab_size", std::to_string(summary_vocab_size)},
        {"model.code_vocab_size", std::to_string(code_vocab_size)},
        {"model.max_summary_len", std::to_string(max_summary_len)},
        {"model.max_code_len", std::to_string(max_code_len)},
        {"model.dropout_p", config::from_double(dropout_p)},
    };
}

bool ModelConfig::set(std::string_view key, std::string_view value) {
    std::size_t* field = nullptr;
    if (key == "model.summary_embed_dim") field = &summary_embed_dim;
    else if (key == "model.code_embed_dim") field = &code_embed_dim;
    else if (key == "model.encoder_hidden") field = &encoder_hidden;
    else if (key == "model.decoder_hidden") field = &decoder_hidden;
    else if (key == "model.edit_vector_dim") field = &edit_vector_dim;
    else if (key == "model.attention_dim") field = &attention_dim;
    else if (key == "model.summary_vocab_size") field = &summary_vocab_size;
    else if (key == "model.code_vocab_size") field = &code_vocab_size;
    else if (key == "model.max_summary_len") field = &max_summary_len;
    else if (key == "model.max_code_len") field = &max_code_len;
    else if (key == "model.dropout_p") {
        dropout_p = config::to_double(key, value);
        return true;
    } else
        return false;
    *field = config::to_size(key, value);
    return true;
}

template <typename T>
ModelParameters<T>::ModelParameters(const ModelConfig& cfg) {
    cfg.validate();
    const std::size_t Es = cfg.summary_embed_dim, Ec = cfg.code_embed_dim, He = cfg.encoder_hidden,
                      Hd = cfg.decoder_hidden, Z = cfg.edit_vector_dim, A = cfg.attn(),
                      Vs = cfg.summary_vocab_size, Vc = cfg.code_vocab_size;
    W_e = {"W_e", Vs, Es};
    Phi = {"Phi", Vc, Ec};
    enc_fwd_w = {"enc_fwd_w", Es + He, 4 * He};
    enc_fwd_b = {"enc_fwd_b", 1, 4 * He};
    enc_bwd_w = {"enc_bwd_w", Es + He, 4 * He};
    enc_bwd_b = {"enc_bwd_b", 1, 4 * He};
    W_alpha = {"W_alpha", Ec + 2 * He, A};
    v_alpha = {"v_alpha", A, 1};
    W_beta = {"W_beta", Ec + 2 * He, A};
    v_beta = {"v_beta", A, 1};
    W_z = {"W_z", 2 * Ec, Z};
    b_z = {"b_z", 1, Z};
    W_init = {"W_init", 2 * He, Hd};
    b_init = {"b_init", 1, Hd};
    dec_w = {"dec_w", Es + Z + Hd, 4 * Hd};
    dec_b = {"dec_b", 1, 4 * Hd};
    W_eta = {"W_eta", 2 * He + Hd, A};
    v_eta = {"v_eta", A, 1};
    W_p = {"W_p", Es + Hd + 2 * He, Vs};
    b_p = {"b_p", 1, Vs};
}

template <typename T>
std::vector<Parameter<T>*> ModelParameters<T>::all() {
    return {&W_e,     &Phi,     &enc_fwd_w, &enc_fwd_b, &enc_bwd_w, &enc_bwd_b, &W_alpha,
            &v_alpha, &W_beta,  &v_beta,    &W_z,       &b_z,       &W_init,    &b_init,
            &dec_w,   &dec_b,   &W_eta,     &v_eta,     &W_p,       &b_p};
}

template <typename T>
std::vector<const Parameter<T>*> ModelParameters<T>::all() const {
    auto* self = const_cast<ModelParameters*>(this);
    const auto ptrs = self->all();
    return {ptrs.begin(), ptrs.end()};
}

template <typename T>
std::size_t ModelParameters<T>::count() const {
    std::size_t n = 0;
    for (const auto* p : all()) n += p->value.size();
    return n;
}

template <typename T>
void ModelParameters<T>::initialize(Rng& rng) {
    for (auto* p : all()) {
        if (p == &W_e || p == &Phi)
            nn::uniform_fill(p->value, T(0.08), rng);
        else if (p->value.rows() == 1)
            p->value.fill(T(0));
        else
            nn::glorot_uniform(p->value, rng);
        p->zero_grad();
    }
}

template <typename T>
void ModelParameters<T>::zero_grad() {
    for (auto* p : all()) p->zero_grad();
}

template <typename T>
template <typename U>
ModelParameters<U> ModelParameters<T>::cast() const {
    ModelParameters<U> out;
    const auto src = all();
    const auto dst = out.all();
    for (std::size_t i = 0; i < src.size(); ++i) {
        const auto& v = src[i]->value;
        std::vector<U> data(v.values().begin(), v.values().end());
        dst[i]->name = src[i]->name;
        dst[i]->value = Matrix<U>(v.rows(), v.cols(), std::move(data));
        dst[i]->grad = Matrix<U>(v.rows(), v.cols());
    }
    return out;
}

template struct ModelParameters<float>;
template struct ModelParameters<double>;
template ModelParameters<double> ModelParameters<float>::cast<double>() const;
template ModelParameters<float> ModelParameters<double>::cast<float>() const;
template ModelParameters<float> ModelParameters<float>::cast<float>() const;
template ModelParameters<double> ModelParameters<double>::cast<double>() const;

std::pair<Tokens, Tokens> compute_diff_sets(std::span<const corpus::Token> x,
                                            std::span<const corpus::Token> x_prime) {
    const std::set<corpus::Token> a(x.begin(), x.end()), b(x_prime.begin(), x_prime.end());
    Tokens ins, del;
    std::set_difference(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(ins));
    std::set_difference(b.begin(), b.end(), a.begin(), a.end(), std::back_inserter(del));
    return {ins, del};
}

EncodedInstance encode_instance(const retrieval::TrainingInstance& inst, const Vocabulary& code_vocab,
                                const Vocabulary& summary_vocab, const ModelConfig& cfg) {
    if (inst.y_prime.empty())
        throw EmptyPrototype("instance " + inst.src_id + ": prototype " + inst.proto_id + " has no tokens");
    const auto cut = [&](const Tokens& t) {
        return std::span<const corpus::Token>(t.data(), std::min(t.size(), cfg.max_summary_len));
    };
    EncodedInstance e;
    e.prototype = summary_vocab.encode(cut(inst.y_prime), true);
    const auto [ins, del] = compute_diff_sets(inst.x, inst.x_prime);
    e.insertions = code_vocab.encode(ins);
    e.deletions = code_vocab.encode(del);
    e.target = summary_vocab.encode(cut(inst.y));
    return e;
}

Batch make_batch(std::span<const EncodedInstance* const> instances) {
    Batch b;
    const std::size_t B = instances.size();
    b.size = B;
    if (B == 0) throw EmptyDataset("make_batch: no instances");
    for (const auto* e : instances) {
        if (e->prototype.empty()) throw EmptyPrototype("make_batch: empty prototype");
        b.proto_len = std::max(b.proto_len, e->prototype.size());
        b.ins_len = std::max(b.ins_len, e->insertions.size());
        b.del_len = std::max(b.del_len, e->deletions.size());
        b.target_len = std::max(b.target_len, e->target.size() + 1);
    }
    const std::size_t Lp = b.proto_len, T = b.target_len;
    b.proto_ids.assign(Lp * B, Vocabulary::kPad);
    b.proto_mask.assign(Lp * B, 0);
    b.memory_mask.assign(B * Lp, 0);
    b.last_position.resize(B);
    b.ins_ids.assign(B * b.ins_len, Vocabulary::kPad);
    b.ins_mask.assign(B * b.ins_len, 0);
    b.del_ids.assign(B * b.del_len, Vocabulary::kPad);
    b.del_mask.assign(B * b.del_len, 0);
    b.decoder_inputs.assign(T * B, Vocabulary::kPad);
    b.decoder_targets.assign(T * B, Vocabulary::kPad);
    b.target_mask.assign(T * B, 0);
    for (std::size_t i = 0; i < B; ++i) {
        const auto& e = *instances[i];
        for (std::size_t t = 0; t < e.prototype.size(); ++t) {
            b.proto_ids[t * B + i] = e.prototype[t];
            b.proto_mask[t * B + i] = 1;
            b.memory_mask[i * Lp + t] = 1;
        }
        b.last_position[i] = static_cast<std::int32_t>(i * Lp + e.prototype.size() - 1);
        for (std::size_t k = 0; k < e.insertions.size(); ++k) {
            b.ins_ids[i * b.ins_len + k] = e.insertions[k];
            b.ins_mask[i * b.ins_len + k] = 1;
        }
        for (std::size_t k = 0; k < e.deletions.size(); ++k) {
            b.del_ids[i * b.del_len + k] = e.deletions[k];
            b.del_mask[i * b.del_len + k] = 1;
        }
        const std::size_t L = e.target.size();
        for (std::size_t t = 0; t <= L; ++t) {
            b.decoder_inputs[t * B + i] = t == 0 ? Vocabulary::kBos : e.target[t - 1];
            b.decoder_targets[t * B + i] = t < L ? e.target[t] : Vocabulary::kEos;
            b.target_mask[t * B + i] = 1;
        }
    }
    return b;
}

Batch make_batch(std::span<const EncodedInstance> instances) {
    std::vector<const EncodedInstance*> ptrs;
    ptrs.reserve(instances.size());
    for (const auto& e : instances) ptrs.push_back(&e);
    return make_batch(ptrs);
}

} // namespace editsum::model
