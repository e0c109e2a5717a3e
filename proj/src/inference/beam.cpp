#include "editsum/error.hpp"
#include "editsum/inference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace editsum::inference {

double Hypothesis::normalized() const {
    const std::size_t n = tokens.size() + (finished ? 1 : 0);
    return n == 0 ? log_prob : log_prob / static_cast<double>(n);
}

namespace {

struct Live {
    Ids tokens;
    double log_prob;
    std::int32_t row; // row of the last scorer call holding this hypothesis
};

std::vector<bool> allowed_mask(const BeamConfig& cfg, std::size_t vocab) {
    std::vector<bool> ok(vocab, true);
    for (auto b : cfg.banned)
        if (b >= 0 && static_cast<std::size_t>(b) < vocab && b != cfg.eos) ok[b] = false;
    return ok;
}

void check_scores(const nn::Matrix<double>& lp, std::size_t rows, std::size_t vocab) {
    if (lp.rows() != rows || lp.cols() != vocab)
        throw ShapeMismatch("scorer returned " + nn::shape_string(lp.shape()) + " for " + std::to_string(rows) +
                            " rows over " + std::to_string(vocab) + " tokens");
}

} // namespace

std::vector<Hypothesis> beam_search(Scorer& scorer, const BeamConfig& cfg) {
    if (cfg.beam_size == 0) throw UsageError("beam size must be at least 1");
    const std::size_t V = scorer.vocab_size();
    const auto ok = allowed_mask(cfg, V);
    std::vector<Live> live = {{{}, 0.0, 0}};
    std::vector<Hypothesis> done;

    struct Cand {
        double lp;
        std::size_t parent;
        TokenId tok;
    };
    std::vector<Cand> cands;
    for (std::size_t t = 0; t < cfg.max_len && !live.empty(); ++t) {
        std::vector<std::int32_t> parents(live.size());
        Ids last(live.size());
        for (std::size_t i = 0; i < live.size(); ++i) {
            parents[i] = live[i].row;
            last[i] = live[i].tokens.empty() ? cfg.start : live[i].tokens.back();
        }
        const auto lp = scorer.step(parents, last);
        check_scores(lp, live.size(), V);

        cands.clear();
        for (std::size_t i = 0; i < live.size(); ++i)
            for (std::size_t v = 0; v < V; ++v)
                if (ok[v] && lp(i, v) > -std::numeric_limits<double>::infinity())
                    cands.push_back({live[i].log_prob + lp(i, v), i, static_cast<TokenId>(v)});
        const std::size_t keep = std::min(cfg.beam_size, cands.size());
        std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(),
                          [](const Cand& a, const Cand& b) {
                              if (a.lp != b.lp) return a.lp > b.lp;
                              if (a.parent != b.parent) return a.parent < b.parent;
                              return a.tok < b.tok;
                          });
        std::vector<Live> next;
        for (std::size_t k = 0; k < keep; ++k) {
            const auto& c = cands[k];
            if (c.tok == cfg.eos) {
                done.push_back({live[c.parent].tokens, c.lp, true});
                continue;
            }
            Live h{live[c.parent].tokens, c.lp, static_cast<std::int32_t>(c.parent)};
            h.tokens.push_back(c.tok);
            next.push_back(std::move(h));
        }
        live = std::move(next);
    }
    for (auto& h : live) done.push_back({std::move(h.tokens), h.log_prob, false});

    std::stable_sort(done.begin(), done.end(), [](const Hypothesis& a, const Hypothesis& b) {
        const double na = a.normalized(), nb = b.normalized();
        if (na != nb) return na > nb;
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        return a.tokens < b.tokens;
    });
    return done;
}

Hypothesis greedy_decode(Scorer& scorer, const BeamConfig& cfg) {
    const std::size_t V = scorer.vocab_size();
    const auto ok = allowed_mask(cfg, V);
    Hypothesis h;
    for (std::size_t t = 0; t < cfg.max_len; ++t) {
        const std::int32_t parent = 0;
        const TokenId last = h.tokens.empty() ? cfg.start : h.tokens.back();
        const auto lp = scorer.step(std::span<const std::int32_t>(&parent, 1), std::span<const TokenId>(&last, 1));
        check_scores(lp, 1, V);
        std::size_t best = V;
        for (std::size_t v = 0; v < V; ++v)
            if (ok[v] && (best == V || lp(0, v) > lp(0, best))) best = v;
        if (best == V) break;
        h.log_prob += lp(0, best);
        if (static_cast<TokenId>(best) == cfg.eos) {
            h.finished = true;
            break;
        }
        h.tokens.push_back(static_cast<TokenId>(best));
    }
    return h;
}

} // namespace editsum::inference
