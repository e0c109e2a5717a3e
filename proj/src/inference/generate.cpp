#include "editsum/error.hpp"
#include "editsum/inference.hpp"

#include <cmath>
#include <exception>

namespace editsum::inference {

template <typename T>
ModelScorer<T>::ModelScorer(const model::ModelParameters<T>& params, const model::ModelConfig& cfg,
                            const model::EncodedInstance& instance)
    : cfg_(cfg) {
    // an inference tape never writes to the parameters it binds
    auto& p = const_cast<model::ModelParameters<T>&>(params);
    w_ = model::bind(tape_, p, cfg_);
    const auto batch = model::make_batch(std::span<const model::EncodedInstance>(&instance, 1));
    enc_ = model::encode_prototype(w_, cfg_, batch, ctx_);
    ev_ = model::compute_edit_vector(w_, cfg_, batch, enc_.h_final, ctx_);
    state_ = model::initial_state(w_, enc_.h_final);
}

template <typename T>
nn::Matrix<double> ModelScorer<T>::step(std::span<const std::int32_t> parents, std::span<const TokenId> last) {
    const std::size_t R = parents.size();
    const bool same = R == state_.s.rows() && [&] {
        for (std::size_t r = 0; r < R; ++r)
            if (parents[r] != static_cast<std::int32_t>(r)) return false;
        return true;
    }();
    model::DecoderState<T> prev = state_;
    if (!same) {
        prev.s = nn::gather_rows(state_.s, parents);
        prev.c = nn::gather_rows(state_.c, parents);
    }
    const std::vector<std::int32_t> rows(R, 0);
    auto out = model::decode_step(w_, cfg_, last, prev, ev_.z, enc_, rows, ctx_);
    state_ = out.state;
    const auto& logits = out.logits.value();
    nn::Matrix<double> lp(R, logits.cols());
    for (std::size_t r = 0; r < R; ++r) {
        double mx = -INFINITY;
        for (std::size_t v = 0; v < logits.cols(); ++v) mx = std::max(mx, static_cast<double>(logits(r, v)));
        double total = 0;
        for (std::size_t v = 0; v < logits.cols(); ++v) total += std::exp(static_cast<double>(logits(r, v)) - mx);
        const double lse = mx + std::log(total);
        for (std::size_t v = 0; v < logits.cols(); ++v) lp(r, v) = static_cast<double>(logits(r, v)) - lse;
    }
    return lp;
}

template class ModelScorer<float>;
template class ModelScorer<double>;

Generator::Generator(const training::Checkpoint& ckpt, const retrieval::InvertedIndex& code_index,
                     const corpus::DatasetSplit& train)
    : ckpt_(ckpt), index_(code_index), train_(train) {
    if (code_index.field() != retrieval::Field::code)
        throw UsageError("generation needs an index over the code field");
}

Generation Generator::generate(std::span<const corpus::Token> code, const BeamConfig& beam,
                               std::optional<std::string_view> exclude_id) const {
    return generate_with(retrieval::retrieve_prototype(index_, train_, code, exclude_id), code, beam);
}

Generation Generator::generate_with(const retrieval::Prototype& proto, std::span<const corpus::Token> code,
                                    const BeamConfig& beam) const {
    retrieval::TrainingInstance inst;
    inst.proto_id = proto.id;
    inst.x.assign(code.begin(), code.end());
    inst.x_prime = proto.code;
    inst.y_prime = proto.summary;
    const auto enc = model::encode_instance(inst, ckpt_.code_vocab, ckpt_.summary_vocab, ckpt_.model);
    ModelScorer<float> scorer(ckpt_.params, ckpt_.model, enc);
    const auto ranked = beam_search(scorer, beam);

    Generation g;
    g.proto_id = proto.id;
    g.insertions = enc.insertions.size();
    g.deletions = enc.deletions.size();
    double zz = 0;
    for (float v : scorer.edit_vector().values()) zz += double(v) * double(v);
    g.z_norm = std::sqrt(zz);
    if (!ranked.empty()) {
        g.ids = ranked.front().tokens;
        g.log_prob = ranked.front().log_prob;
        g.score = ranked.front().normalized();
    }
    g.summary = ckpt_.summary_vocab.decode(g.ids, true);
    return g;
}

std::vector<Generation> Generator::generate_all(const corpus::DatasetSplit& inputs, const BeamConfig& beam,
                                                bool exclude_self) const {
    std::vector<Generation> out(inputs.pairs.size());
    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < inputs.pairs.size(); ++i) {
        try {
            const auto& p = inputs.pairs[i];
            out[i] = generate(p.code_tokens, beam,
                              exclude_self ? std::optional<std::string_view>(p.id) : std::nullopt);
        } catch (...) {
#pragma omp critical(editsum_generate_error)
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);
    return out;
}

} // namespace editsum::inference
