#include "editsum/error.hpp"
#include "editsum/metrics.hpp"
#include "editsum/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace editsum::retrieval {

VsmModel::VsmModel(const DatasetSplit& train) : train_(&train) {
    if (train.pairs.empty()) throw EmptyCorpus("vsm: empty training corpus");
    const std::size_t n = train.pairs.size();
    std::vector<std::map<std::string_view, std::uint32_t>> tf(n);
    std::unordered_map<Token, std::uint32_t> df;
    for (std::size_t d = 0; d < n; ++d) {
        for (const auto& t : train.pairs[d].code_tokens) ++tf[d][t];
        for (const auto& [t, _] : tf[d]) ++df[Token(t)];
    }
    const double N = static_cast<double>(n);
    for (const auto& [t, f] : df) idf_[t] = std::log((1.0 + N) / (1.0 + f)) + 1.0;
    norm_.assign(n, 0.0);
    for (std::size_t d = 0; d < n; ++d) {
        for (const auto& [t, f] : tf[d]) {
            const Token term(t);
            const double w = static_cast<double>(f) * idf_.at(term);
            postings_[term].push_back({static_cast<std::uint32_t>(d), w});
            norm_[d] += w * w;
        }
        norm_[d] = std::sqrt(norm_[d]);
    }
    by_id_.resize(n);
    std::iota(by_id_.begin(), by_id_.end(), std::size_t{0});
    std::sort(by_id_.begin(), by_id_.end(),
              [&](std::size_t a, std::size_t b) { return train.pairs[a].id < train.pairs[b].id; });
    rank_.resize(n);
    for (std::size_t r = 0; r < n; ++r) rank_[by_id_[r]] = r;
}

double VsmModel::idf(std::string_view term) const {
    const auto it = idf_.find(Token(term));
    const double N = static_cast<double>(norm_.size());
    return it != idf_.end() ? it->second : std::log(1.0 + N) + 1.0;
}

std::vector<VsmModel::Neighbor> VsmModel::nearest(std::span<const Token> query, std::size_t k) const {
    if (k == 0) throw UsageError("vsm: k must be at least 1");
    std::map<std::string_view, std::uint32_t> qtf;
    for (const auto& t : query) ++qtf[t];
    double qnorm = 0.0;
    std::vector<double> dot(norm_.size(), 0.0);
    for (const auto& [t, f] : qtf) {
        const double qw = static_cast<double>(f) * idf(t);
        qnorm += qw * qw;
        const auto it = postings_.find(Token(t));
        if (it == postings_.end()) continue;
        for (const auto& e : it->second) dot[e.doc] += qw * e.weight;
    }
    qnorm = std::sqrt(qnorm);
    std::vector<Neighbor> all(norm_.size());
    for (std::size_t d = 0; d < norm_.size(); ++d) {
        const double denom = qnorm * norm_[d];
        all[d] = {d, denom > 0.0 ? dot[d] / denom : 0.0};
    }
    const auto better = [&](const Neighbor& a, const Neighbor& b) {
        if (a.cosine != b.cosine) return a.cosine > b.cosine;
        return rank_[a.pair] < rank_[b.pair];
    };
    const std::size_t n = std::min(k, all.size());
    std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n), all.end(), better);
    all.resize(n);
    return all;
}

Tokens vsm_retrieve(const VsmModel& model, std::span<const Token> input_code_tokens) {
    return model.train().pairs[model.nearest(input_code_tokens, 1).front().pair].summary_tokens;
}

Tokens vsm_retrieve(const DatasetSplit& train, std::span<const Token> input_code_tokens) {
    return vsm_retrieve(VsmModel(train), input_code_tokens);
}

Tokens nngen_select(const VsmModel& model, std::span<const Token> input_code_tokens, std::size_t k) {
    const auto near = model.nearest(input_code_tokens, k);
    std::size_t best = near.front().pair;
    double best_bleu = -1.0;
    for (const auto& nb : near) {
        const double s =
            metrics::sentence_bleu(model.train().pairs[nb.pair].code_tokens, input_code_tokens, 4)[3];
        if (s > best_bleu) {
            best_bleu = s;
            best = nb.pair;
        }
    }
    return model.train().pairs[best].summary_tokens;
}

Tokens nngen_select(const DatasetSplit& train, std::span<const Token> input_code_tokens, std::size_t k) {
    return nngen_select(VsmModel(train), input_code_tokens, k);
}

} // namespace editsum::retrieval
