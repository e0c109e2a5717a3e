// Acceptance run: one PASS/FAIL line per criterion. `acceptance 3 7` runs a
// subset. Exit status is 1 when any selected criterion fails.

#include "editsum/cli.hpp"
#include "editsum/inference.hpp"
#include "editsum/io.hpp"
#include "editsum/metrics.hpp"
#include "editsum/retrieval.hpp"
#include "editsum/synth.hpp"
#include "editsum/training.hpp"
#include "gradcheck.hpp"
#include "metric_oracles.hpp"
#include "retrieval_oracles.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

using namespace editsum;
namespace fs = std::filesystem;
namespace r = editsum::retrieval;
namespace m = editsum::metrics;
using corpus::Tokens;

namespace {

// Pinned tolerances and budgets.
constexpr double kGradRelTol = 1e-3;
constexpr double kGradStep = 1e-5;
constexpr std::size_t kGradSamples = 200;
constexpr double kGradBudgetSec = 60;
constexpr double kRetrievalBudgetSec = 10;
constexpr double kJaccardMin = 0.3;
constexpr double kJaccardMax = 0.7;
constexpr double kMetricAbsTol = 1e-6;
constexpr double kMetricBudgetSec = 60;
constexpr double kMemLossMax = 0.1;
constexpr double kMemExactMin = 0.9;
constexpr double kMemBudgetSec = 600;
constexpr double kTransferBleuMargin = 5.0;
constexpr double kTransferBudgetSec = 1800;
constexpr double kBeamLogProbTol = 1e-12;

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail += (detail.empty() ? "" : "; ") + what;
        }
    }
    void note(const std::string& s) { detail += (detail.empty() ? "" : "; ") + s; }
};

std::string num(double v, int prec = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Tokens words(const std::string& s) {
    std::istringstream in(s);
    Tokens out;
    for (std::string w; in >> w;) out.push_back(w);
    return out;
}

// ---- 1. gradient correctness ----------------------------------------------

Outcome gradients() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    model::ModelConfig cfg;
    cfg.summary_embed_dim = 16;
    cfg.code_embed_dim = 16;
    cfg.encoder_hidden = 24;
    cfg.decoder_hidden = 24;
    cfg.edit_vector_dim = 16;
    cfg.summary_vocab_size = 40;
    cfg.code_vocab_size = 40;
    cfg.dropout_p = 0.0;
    model::ModelParameters<double> p(cfg);
    nn::Rng rng(101);
    p.initialize(rng);
    for (auto* q : p.all())
        if (q->value.rows() == 1) nn::uniform_fill(q->value, 0.1, rng);

    std::uniform_int_distribution<int> tok(4, 39);
    const auto ids = [&](std::size_t n) {
        corpus::Ids v(n);
        for (auto& t : v) t = tok(rng);
        return v;
    };
    const auto set = [&](std::size_t n) {
        std::vector<int> all(36);
        std::iota(all.begin(), all.end(), 4);
        std::shuffle(all.begin(), all.end(), rng);
        corpus::Ids v(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
        std::sort(v.begin(), v.end());
        return v;
    };
    std::vector<model::EncodedInstance> items;
    for (auto [proto, ins, del, tgt] : {std::array<std::size_t, 4>{4, 3, 2, 4}, {2, 0, 3, 2}, {5, 2, 0, 3}}) {
        model::EncodedInstance e;
        e.prototype = ids(proto);
        e.prototype.insert(e.prototype.begin(), corpus::Vocabulary::kBos);
        e.prototype.push_back(corpus::Vocabulary::kEos);
        e.insertions = set(ins);
        e.deletions = set(del);
        e.target = ids(tgt);
        items.push_back(std::move(e));
    }
    const auto batch = model::make_batch(std::span<const model::EncodedInstance>(items));
    const gradcheck::LossFn f = [&](nn::Tape<double>& tape) {
        model::RunContext ctx;
        return model::forward_loss(model::bind(tape, p, cfg), cfg, batch, ctx);
    };
    const auto entries = gradcheck::check_sampled(f, p.all(), kGradSamples, 102, kGradStep);
    std::set<std::string> families;
    for (const auto& e : entries) families.insert(e.param);
    const double worst = gradcheck::max_rel_error(entries);
    const double secs = seconds_since(t0);
    o.require(entries.size() == kGradSamples, "sample count");
    o.require(families.size() == p.all().size(), "not every weight family sampled");
    o.require(worst <= kGradRelTol, "max rel error " + num(worst));
    o.require(secs < kGradBudgetSec, "runtime " + num(secs) + " s");
    o.note(std::to_string(entries.size()) + " entries over " + std::to_string(families.size()) +
           " families, max rel error " + num(worst, 3) + ", " + num(secs, 3) + " s");
    return o;
}

// ---- 2. retrieval oracles --------------------------------------------------

Outcome retrieval_oracles() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(202);
    std::size_t bm25_q = 0, bm25_bad = 0, vsm_bad = 0, nngen_bad = 0, vsm_q = 0;
    for (int c = 0; c < 5; ++c) {
        const auto s = oracle::random_split(rng, 100, 50, 25, 8);
        const auto ix = r::build_index(s.pairs, r::Field::code);
        oracle::Bm25 bm;
        std::vector<std::string> ids;
        for (const auto& p : s.pairs) {
            bm.docs.push_back(p.code_tokens);
            ids.push_back(p.id);
        }
        for (int q = 0; q < 20; ++q, ++bm25_q) {
            Tokens query = s.pairs[rng() % s.pairs.size()].code_tokens;
            query.resize(std::min<std::size_t>(query.size(), 6));
            query.push_back("w" + std::to_string(rng() % 60));
            const auto got = r::query_top_k(ix, query, 10);
            const auto want = oracle::bm25_rank(bm, ids, query, 10);
            bool same = got.size() == want.size();
            for (std::size_t i = 0; same && i < got.size(); ++i)
                same = got[i].doc_id == want[i].id && std::abs(got[i].score - want[i].score) <= 1e-9;
            bm25_bad += !same;
        }
        const r::VsmModel vsm(s);
        for (int q = 0; q < 20; ++q, ++vsm_q) {
            Tokens query;
            for (int i = 0; i < 8; ++i) query.push_back("w" + std::to_string(rng() % 55));
            const auto ranked = oracle::vsm_rank(s, query, 5);
            vsm_bad += r::vsm_retrieve(vsm, query) != s.pairs[ranked[0]].summary_tokens;
            std::size_t best = ranked[0];
            double best_bleu = -1;
            for (auto d : ranked) {
                const double b = oracle::sentence_bleu4(s.pairs[d].code_tokens, query);
                if (b > best_bleu) {
                    best_bleu = b;
                    best = d;
                }
            }
            nngen_bad += r::nngen_select(vsm, query, 5) != s.pairs[best].summary_tokens;
        }
    }
    const double secs = seconds_since(t0);
    o.require(bm25_bad == 0, std::to_string(bm25_bad) + " BM25 rankings differ");
    o.require(vsm_bad == 0, std::to_string(vsm_bad) + " VSM selections differ");
    o.require(nngen_bad == 0, std::to_string(nngen_bad) + " NNGen selections differ");
    o.require(secs < kRetrievalBudgetSec, "runtime " + num(secs) + " s");
    o.note(std::to_string(bm25_q) + " top-10 queries, " + std::to_string(vsm_q) + " VSM/NNGen queries over 5 corpora, " +
           num(secs, 3) + " s");
    return o;
}

// ---- 3. pair construction ---------------------------------------------------

double jaccard(const Tokens& a, const Tokens& b) {
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : double(inter) / double(uni);
}

Outcome pair_construction() {
    Outcome o;
    const auto c = synth::generate({});
    const auto train = corpus::make_split(corpus::SplitName::train, c.train);
    const auto index = r::build_index(train.pairs, r::Field::summary);
    const auto got = r::build_training_instances(train, index);

    std::size_t violations = 0;
    for (const auto& inst : got) {
        const double j = jaccard(inst.y, inst.y_prime);
        violations += !(j >= kJaccardMin && j <= kJaccardMax) || inst.src_id == inst.proto_id;
    }

    // brute force: score every other document, keep the top 20, filter
    std::vector<std::map<std::string, std::size_t>> tf(train.pairs.size());
    std::map<std::string, std::size_t> df;
    double avg = 0;
    for (std::size_t d = 0; d < train.pairs.size(); ++d) {
        for (const auto& t : train.pairs[d].summary_tokens) ++tf[d][t];
        for (const auto& [t, n] : tf[d]) ++df[t];
        avg += double(train.pairs[d].summary_tokens.size());
    }
    avg /= double(train.pairs.size());
    const double N = double(train.pairs.size());
    std::vector<std::pair<std::string, std::string>> want;
    for (std::size_t i = 0; i < train.pairs.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t d = 0; d < train.pairs.size(); ++d) {
            if (d == i) continue;
            double s = 0;
            for (const auto& t : train.pairs[i].summary_tokens) {
                const auto it = tf[d].find(t);
                if (it == tf[d].end()) continue;
                const double n = double(df[t]), f = double(it->second);
                const double idf = std::log((N - n + 0.5) / (n + 0.5) + 1.0);
                s += idf * f * 2.2 / (f + 1.2 * (0.25 + 0.75 * double(train.pairs[d].summary_tokens.size()) / avg));
            }
            if (s > 0) scored.push_back({s, d});
        }
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (std::abs(a.first - b.first) > 1e-9 * std::max(1.0, std::abs(a.first))) return a.first > b.first;
            return train.pairs[a.second].id < train.pairs[b.second].id;
        });
        if (scored.size() > 20) scored.resize(20);
        for (const auto& [s, d] : scored) {
            const double j = jaccard(train.pairs[i].summary_tokens, train.pairs[d].summary_tokens);
            if (j >= kJaccardMin && j <= kJaccardMax) want.push_back({train.pairs[i].id, train.pairs[d].id});
        }
    }
    std::vector<std::pair<std::string, std::string>> have;
    for (const auto& inst : got) have.push_back({inst.src_id, inst.proto_id});
    o.require(!got.empty(), "no instances");
    o.require(violations == 0, std::to_string(violations) + " instances break the Jaccard window or self-exclusion");
    o.require(have.size() == want.size(),
              "count " + std::to_string(have.size()) + " vs brute force " + std::to_string(want.size()));
    o.require(have == want, "instance list differs from brute force");
    o.note(std::to_string(have.size()) + " instances from " + std::to_string(train.pairs.size()) +
           " pairs, brute force " + std::to_string(want.size()));
    return o;
}

// ---- 4. metric oracles ----------------------------------------------------

// Sequences over {a, b, c} as one char per token; the library sees the
// same sequences as Tokens.
std::vector<std::string> sequences_of_length(std::size_t len) {
    std::vector<std::string> out{""};
    for (std::size_t l = 0; l < len; ++l) {
        std::vector<std::string> next;
        for (const auto& s : out)
            for (char c : {'a', 'b', 'c'}) next.push_back(s + c);
        out = std::move(next);
    }
    return out;
}

Tokens as_tokens(const std::string& s) {
    Tokens t;
    for (char c : s) t.emplace_back(1, c);
    return t;
}

bool is_subsequence(const std::string& sub, const std::string& s) {
    std::size_t j = 0;
    for (std::size_t i = 0; i < s.size() && j < sub.size(); ++i)
        if (s[i] == sub[j]) ++j;
    return j == sub.size();
}

// Distinct subsequences of `a` from all 2^|a| masks, longest first, so the
// masks are enumerated once per `a` rather than once per pair.
std::vector<std::string> subsequences_longest_first(const std::string& a) {
    std::vector<std::string> subs;
    for (std::uint32_t mask = 0; mask < (1u << a.size()); ++mask) {
        std::string sub;
        for (std::size_t i = 0; i < a.size(); ++i)
            if (mask >> i & 1u) sub += a[i];
        subs.push_back(std::move(sub));
    }
    std::sort(subs.begin(), subs.end());
    subs.erase(std::unique(subs.begin(), subs.end()), subs.end());
    std::stable_sort(subs.begin(), subs.end(),
                     [](const std::string& x, const std::string& y) { return x.size() > y.size(); });
    return subs;
}

std::size_t lcs_by_enumeration(const std::vector<std::string>& subs_of_a, const std::string& b) {
    for (const auto& s : subs_of_a)
        if (is_subsequence(s, b)) return s.size();
    return 0;
}

Outcome metric_oracles() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto close = [&](double got, double want, const std::string& what) {
        o.require(std::abs(got - want) <= kMetricAbsTol, what + " " + num(got, 10) + " vs " + num(want, 10));
    };

    // BLEU: values from the pooled-count oracle; BLEU1 is the 81.87 of the example
    {
        const std::vector<Tokens> c{words("the cat sat on mat")}, ref{words("the cat sat on the mat")};
        const auto s = m::bleu(c, ref);
        for (std::size_t n = 1; n <= 4; ++n) close(s[n - 1], oracle::corpus_bleu(c, ref, n), "BLEU" + std::to_string(n));
        close(s[0], 100.0 * std::exp(1.0 - 6.0 / 5.0), "BLEU1");
        const std::vector<Tokens> same{words("returns true if the list is empty")};
        close(m::bleu(same, same)[3], 100.0, "identity BLEU4");
        const auto zero = m::bleu(std::vector<Tokens>{words("a b c d")}, std::vector<Tokens>{words("e f g h")});
        for (double v : zero) close(v, 0.0, "disjoint BLEU");
    }
    // METEOR
    close(m::meteor(words("a b"), words("c d")), 0.0, "METEOR disjoint");
    close(m::meteor(words("get"), words("get")), 0.5, "METEOR single token");
    {
        const auto ten = words("returns the number of elements in this list or zero");
        close(m::meteor(ten, ten), 0.9995, "METEOR 10 tokens");
    }
    // ROUGE-L and ROUGE-W
    close(m::rouge_l(words("a b c"), words("a b c")), 1.0, "ROUGE-L identity");
    close(m::rouge_l(words("a b"), words("c d")), 0.0, "ROUGE-L disjoint");
    close(m::rouge_l(words("the cat"), words("the cat sat")), (3.25 * 2.0 / 3.0) / (2.0 / 3.0 + 2.25), "ROUGE-L");
    close(m::rouge_w(words("a b c d"), words("a b c d")), 1.0, "ROUGE-W identity");
    close(m::rouge_w(words("a b"), words("c d")), 0.0, "ROUGE-W disjoint");
    {
        const auto ref = words("a b c d e");
        const auto run = words("a b c x y"), scattered = words("a x c y e");
        close(m::wlcs(run, ref), oracle::wlcs(run, ref, 1.2), "WLCS run");
        close(m::wlcs(scattered, ref), oracle::wlcs(scattered, ref, 1.2), "WLCS scattered");
        o.require(m::rouge_w(run, ref) > m::rouge_w(scattered, ref), "ROUGE-W prefers the consecutive run");
    }
    // keyword buckets on the planted fixture
    {
        std::vector<Tokens> train;
        for (int i = 0; i < 120; ++i) train.push_back(words("write the value to"));
        for (int i = 0; i < 30; ++i) train.push_back(words("convert buffer"));
        for (int i = 0; i < 15; ++i) train.push_back(words("socket"));
        for (int i = 0; i < 3; ++i) train.push_back(words("zebra"));
        const std::vector<Tokens> gen{words("write the zebra to socket"), words("convert buffer to zebra"),
                                      words("write the value to file"),   words("returns true if zebra zebra"),
                                      words("convert socket"),            words("gets quokka"),
                                      words("write buffer to socket"),    words("sets the value"),
                                      words("write the zebra"),           words("nothing matches here")};
        const std::vector<Tokens> ref{words("write the zebra to file"), words("convert buffer to socket"),
                                      words("write the value to file"), words("returns true if zebra"),
                                      words("convert socket socket"),   words("gets quokka"),
                                      words("write buffer to socket"),  words("sets value"),
                                      words("read the zebra"),          words("something else")};
        const auto rep = m::keyword_bucket_analysis(gen, ref, m::token_frequencies(train));
        const std::map<std::size_t, std::size_t> want = {{10, 10}, {20, 12}, {50, 16}, {100, 16}};
        for (const auto& [t, n] : want)
            o.require(rep.buckets.at(t) == n, "keyword bucket <" + std::to_string(t));
    }

    // LCS sweep: every pair with both lengths <= 7, then every sequence of
    // length 8..10 against 12 random partners of length <= 10
    std::size_t pairs = 0, bad = 0;
    std::vector<std::string> small;
    for (std::size_t len = 0; len <= 7; ++len)
        for (auto& s : sequences_of_length(len)) small.push_back(std::move(s));
    std::vector<Tokens> small_tokens;
    for (const auto& s : small) small_tokens.push_back(as_tokens(s));
    for (std::size_t i = 0; i < small.size(); ++i) {
        const auto subs = subsequences_longest_first(small[i]);
        for (std::size_t j = 0; j < small.size(); ++j) {
            bad += m::lcs_length(small_tokens[i], small_tokens[j]) != lcs_by_enumeration(subs, small[j]);
            ++pairs;
        }
    }
    std::mt19937 rng(404);
    std::uniform_int_distribution<std::size_t> len(0, 10);
    std::uniform_int_distribution<int> sym(0, 2);
    for (std::size_t l = 8; l <= 10; ++l)
        for (const auto& a : sequences_of_length(l)) {
            const auto subs = subsequences_longest_first(a);
            const auto at = as_tokens(a);
            for (int k = 0; k < 12; ++k) {
                std::string b(len(rng), 'a');
                for (auto& c : b) c = static_cast<char>('a' + sym(rng));
                const auto bt = as_tokens(b);
                const std::size_t want = lcs_by_enumeration(subs, b);
                bad += m::lcs_length(at, bt) != want;
                bad += m::lcs_length(bt, at) != want;
                pairs += 2;
            }
        }
    const double secs = seconds_since(t0);
    o.require(bad == 0, std::to_string(bad) + " LCS mismatches");
    o.require(secs < kMetricBudgetSec, "runtime " + num(secs) + " s");
    o.note("hand examples ok, LCS " + std::to_string(pairs) + " pairs checked, " + num(secs, 3) + " s");
    return o;
}

// ---- 5. memorization ------------------------------------------------------

Outcome memorization() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    synth::SynthConfig sc;
    sc.train_pairs = 32;
    sc.valid_pairs = 0;
    sc.test_pairs = 0;
    sc.rare_fillers = 0;
    sc.seed = 5;
    const auto c = synth::generate(sc);
    const auto train = corpus::make_split(corpus::SplitName::train, c.train);
    const auto index = r::build_index(train.pairs, r::Field::code);
    const auto inst = r::build_code_instances(train, train, index, true);

    auto mc = model::ModelConfig::desk();
    mc.dropout_p = 0.0;
    auto tc = training::TrainerConfig::desk();
    tc.batch_size = 8;
    tc.lr_decay = 1.0;
    tc.patience = 0;
    tc.max_epochs = 150;
    tc.seed = 5;
    const auto data = training::prepare_data(inst, inst, mc, tc);
    const auto ck = training::train(data, mc, tc);
    const double loss = training::validation_loss(ck, data.train, false);

    const inference::Generator gen(ck, index, train);
    const auto out = gen.generate_all(train, inference::BeamConfig{}, true);
    std::size_t exact = 0;
    for (std::size_t i = 0; i < out.size(); ++i) exact += out[i].summary == train.pairs[i].summary_tokens;
    const double rate = double(exact) / double(out.size());
    const double secs = seconds_since(t0);
    o.require(inst.size() == 32, "expected 32 instances");
    o.require(loss < kMemLossMax, "training loss " + num(loss));
    o.require(rate >= kMemExactMin, "exact match " + num(100 * rate, 3) + "%");
    o.require(secs < kMemBudgetSec, "runtime " + num(secs) + " s");
    o.note("loss " + num(loss, 3) + " after " + std::to_string(ck.epochs_run) + " epochs (best " +
           std::to_string(ck.epoch) + "), exact " + std::to_string(exact) + "/" + std::to_string(out.size()) +
           " with beam 10, " + num(secs, 3) + " s");
    return o;
}

// ---- 6. pattern transfer --------------------------------------------------

std::size_t rare_hits(const std::vector<Tokens>& hyp, const std::vector<Tokens>& ref,
                      const std::set<std::string>& rare) {
    std::size_t n = 0;
    for (std::size_t i = 0; i < ref.size(); ++i)
        for (const auto& w : std::set<std::string>(ref[i].begin(), ref[i].end()))
            if (rare.count(w) && std::find(hyp[i].begin(), hyp[i].end(), w) != hyp[i].end()) ++n;
    return n;
}

Outcome pattern_transfer() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto c = synth::generate({});
    const auto train = corpus::make_split(corpus::SplitName::train, c.train);
    const auto valid = corpus::make_split(corpus::SplitName::valid, c.valid);
    const auto test = corpus::make_split(corpus::SplitName::test, c.test);
    const auto sidx = r::build_index(train.pairs, r::Field::summary);
    const auto cidx = r::build_index(train.pairs, r::Field::code);
    const auto tr = r::build_training_instances(train, sidx);
    const auto va = r::build_code_instances(valid, train, cidx, false);

    auto mc = model::ModelConfig::desk();
    auto tc = training::TrainerConfig::desk();
    tc.max_epochs = 5;
    const auto data = training::prepare_data(tr, va, mc, tc);
    const auto ck = training::train(data, mc, tc);

    std::vector<Tokens> model_out, retrieved, refs, train_summaries;
    const inference::Generator gen(ck, cidx, train);
    for (const auto& g : gen.generate_all(test, inference::BeamConfig{}, false)) model_out.push_back(g.summary);
    for (const auto& p : test.pairs) {
        retrieved.push_back(r::retrieve_prototype(cidx, train, p.code_tokens).summary);
        refs.push_back(p.summary_tokens);
    }
    for (const auto& p : train.pairs) train_summaries.push_back(p.summary_tokens);
    const double bleu_model = m::bleu(model_out, refs)[0];
    const double bleu_retrieve = m::bleu(retrieved, refs)[0];
    const auto freq = m::token_frequencies(train_summaries);
    const auto kw_model = m::keyword_bucket_analysis(model_out, refs, freq);
    const auto kw_retrieve = m::keyword_bucket_analysis(retrieved, refs, freq);
    const std::set<std::string> rare(c.rare.begin(), c.rare.end());
    const std::size_t rare_model = rare_hits(model_out, refs, rare);
    const std::size_t rare_retrieve = rare_hits(retrieved, refs, rare);
    const double secs = seconds_since(t0);

    o.require(test.pairs.size() == 200, "expected 200 held-out pairs");
    o.require(bleu_model >= bleu_retrieve + kTransferBleuMargin,
              "BLEU1 margin " + num(bleu_model - bleu_retrieve));
    o.require(kw_model.buckets.at(10) > kw_retrieve.buckets.at(10), "keyword bucket <10 not higher");
    o.require(rare_model > rare_retrieve, "rare fillers not higher");
    o.require(secs < kTransferBudgetSec, "runtime " + num(secs) + " s");
    o.note("BLEU1 model " + num(bleu_model) + " vs retrieve " + num(bleu_retrieve) + ", bucket<10 " +
           std::to_string(kw_model.buckets.at(10)) + " vs " + std::to_string(kw_retrieve.buckets.at(10)) +
           ", rare fillers " + std::to_string(rare_model) + " vs " + std::to_string(rare_retrieve) + ", " +
           std::to_string(ck.epochs_run) + " epochs, " + num(secs, 4) + " s");
    return o;
}

// ---- 7. decoding ------------------------------------------------------------

// Next-token log-probabilities drawn from a hash of the prefix.
class TableScorer final : public inference::Scorer {
  public:
    explicit TableScorer(std::uint64_t seed) : seed_(seed) {}
    std::size_t vocab_size() const override { return 4; }
    nn::Matrix<double> step(std::span<const std::int32_t> parents, std::span<const corpus::TokenId> last) override {
        std::vector<corpus::Ids> next(parents.size());
        for (std::size_t i = 0; i < parents.size(); ++i)
            if (!first_) {
                next[i] = rows_.at(parents[i]);
                next[i].push_back(last[i]);
            }
        first_ = false;
        rows_ = next;
        nn::Matrix<double> out(parents.size(), 4);
        for (std::size_t i = 0; i < rows_.size(); ++i) {
            const auto lp = dist(rows_[i]);
            for (std::size_t v = 0; v < 4; ++v) out(i, v) = lp[v];
        }
        return out;
    }
    std::array<double, 4> dist(const corpus::Ids& prefix) const {
        std::uint64_t h = seed_;
        for (auto t : prefix) h = h * 1000003u + std::uint64_t(t) + 1;
        std::mt19937_64 g(h);
        std::array<double, 4> w{};
        double total = 0;
        for (auto& x : w) total += x = std::exp(3.0 * std::uniform_real_distribution<double>(0, 1)(g));
        for (auto& x : w) x = std::log(x / total);
        return w;
    }

  private:
    std::uint64_t seed_;
    bool first_ = true;
    std::vector<corpus::Ids> rows_;
};

Outcome decoding() {
    Outcome o;
    // beam 1 against greedy on a random small model
    model::ModelConfig cfg;
    cfg.summary_embed_dim = 6;
    cfg.code_embed_dim = 5;
    cfg.encoder_hidden = 5;
    cfg.decoder_hidden = 7;
    cfg.edit_vector_dim = 4;
    cfg.summary_vocab_size = 30;
    cfg.code_vocab_size = 30;
    cfg.dropout_p = 0.0;
    model::ModelParameters<double> p(cfg);
    nn::Rng prng(707);
    for (auto* q : p.all()) nn::uniform_fill(q->value, 0.6, prng);
    std::mt19937_64 rng(708);
    std::uniform_int_distribution<int> tok(4, 29), len(1, 5);
    inference::BeamConfig one;
    one.beam_size = 1;
    std::size_t greedy_bad = 0;
    for (int trial = 0; trial < 100; ++trial) {
        model::EncodedInstance e;
        e.prototype.push_back(corpus::Vocabulary::kBos);
        for (int i = len(rng); i > 0; --i) e.prototype.push_back(tok(rng));
        e.prototype.push_back(corpus::Vocabulary::kEos);
        std::set<int> ins, del;
        for (int i = len(rng) - 1; i > 0; --i) ins.insert(tok(rng));
        for (int i = len(rng) - 1; i > 0; --i) del.insert(tok(rng));
        e.insertions.assign(ins.begin(), ins.end());
        e.deletions.assign(del.begin(), del.end());
        inference::ModelScorer<double> a(p, cfg, e), b(p, cfg, e);
        const auto beam = inference::beam_search(a, one);
        const auto greedy = inference::greedy_decode(b, one);
        greedy_bad += beam.size() != 1 || beam[0].tokens != greedy.tokens || beam[0].finished != greedy.finished ||
                      std::abs(beam[0].log_prob - greedy.log_prob) > kBeamLogProbTol;
    }

    // toy vocabulary {0, 1, 2} plus EOS = 3, max_len 3: enumerate every
    // sequence and compare the whole ranking
    const corpus::TokenId eos = 3;
    std::size_t enum_bad = 0;
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        TableScorer s(seed);
        std::vector<inference::Hypothesis> all;
        std::vector<std::pair<corpus::Ids, double>> frontier = {{{}, 0.0}};
        for (std::size_t l = 0; l <= 3; ++l) {
            std::vector<std::pair<corpus::Ids, double>> grown;
            for (const auto& [prefix, lp] : frontier) {
                if (l == 3) {
                    all.push_back({prefix, lp, false});
                    continue;
                }
                const auto d = s.dist(prefix);
                all.push_back({prefix, lp + d[eos], true});
                for (corpus::TokenId v = 0; v < 3; ++v) {
                    auto q = prefix;
                    q.push_back(v);
                    grown.push_back({q, lp + d[v]});
                }
            }
            frontier = std::move(grown);
        }
        std::sort(all.begin(), all.end(), [](const auto& a, const auto& b) {
            if (a.normalized() != b.normalized()) return a.normalized() > b.normalized();
            if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
            return a.tokens < b.tokens;
        });
        inference::BeamConfig bc;
        bc.beam_size = 36; // every candidate of the last step
        bc.max_len = 3;
        bc.eos = eos;
        bc.start = 0;
        bc.banned.clear();
        const auto got = inference::beam_search(s, bc);
        bool same = got.size() == all.size();
        for (std::size_t i = 0; same && i < got.size(); ++i)
            same = got[i].tokens == all[i].tokens && got[i].finished == all[i].finished &&
                   std::abs(got[i].log_prob - all[i].log_prob) <= kBeamLogProbTol;
        enum_bad += !same;
    }
    o.require(greedy_bad == 0, std::to_string(greedy_bad) + "/100 beam-1 outputs differ from greedy");
    o.require(enum_bad == 0, std::to_string(enum_bad) + "/30 toy rankings differ from enumeration");
    o.note("100 beam-1 vs greedy inputs, 30 toy tables of 40 sequences each");
    return o;
}

// ---- 8. determinism and persistence ----------------------------------------

int cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    if (code != 0) std::cerr << err.str();
    return code;
}

// synth -> build-index x2 -> make-pairs x2 -> train -> generate -> evaluate
bool end_to_end(const fs::path& dir) {
    const auto s = [&](const std::string& f) { return (dir / f).string(); };
    const std::string train = s("data/train.jsonl");
    return cli({"synth", "--out-dir", s("data"), "--train-pairs", "300", "--valid-pairs", "30", "--test-pairs", "30",
                "--rare-fillers", "8", "--seed", "3"}) == 0 &&
           cli({"build-index", "--corpus", train, "--field", "summary", "--out", s("sidx.bin")}) == 0 &&
           cli({"build-index", "--corpus", train, "--field", "code", "--out", s("cidx.bin")}) == 0 &&
           cli({"make-pairs", "--corpus", train, "--index", s("sidx.bin"), "--top-k", "5", "--out",
                s("pairs.jsonl")}) == 0 &&
           cli({"make-pairs", "--corpus", train, "--index", s("cidx.bin"), "--mode", "code", "--queries",
                s("data/valid.jsonl"), "--out", s("valid.jsonl")}) == 0 &&
           cli({"train", "--pairs", s("pairs.jsonl"), "--valid", s("valid.jsonl"), "--preset", "desk", "--set",
                "model.summary_embed_dim=32", "--set", "model.code_embed_dim=32", "--set", "model.encoder_hidden=32",
                "--set", "model.decoder_hidden=32", "--set", "model.edit_vector_dim=16", "--set",
                "train.max_epochs=2", "--seed", "7", "--out-dir", s("run")}) == 0 &&
           cli({"generate", "--checkpoint", s("run/checkpoint.bin"), "--index", s("cidx.bin"), "--corpus", train,
                "--input", s("data/test.jsonl"), "--out", s("gen.jsonl")}) == 0 &&
           cli({"evaluate", "--generated", s("gen.jsonl"), "--references", s("data/test.jsonl"), "--out",
                s("report.json")}) == 0;
}

Outcome determinism() {
    Outcome o;
    const fs::path root = fs::temp_directory_path() / "editsum_acceptance_determinism";
    fs::remove_all(root);
    const bool ran = end_to_end(root / "a") && end_to_end(root / "b");
    o.require(ran, "end-to-end run failed");
    if (ran) {
        for (const char* f : {"run/checkpoint.bin", "run/loss_log.tsv", "run/manifest.json", "gen.jsonl",
                              "report.json", "report.json.manifest.json"})
            o.require(io::read_file(root / "a" / f) == io::read_file(root / "b" / f), std::string(f) + " differs");

        // round trip through the file keeps the validation loss bit for bit
        const auto ck = training::load_checkpoint(root / "a/run/checkpoint.bin");
        const auto va = r::read_instances(root / "a/valid.jsonl");
        std::vector<model::EncodedInstance> enc;
        for (const auto& i : va) enc.push_back(model::encode_instance(i, ck.code_vocab, ck.summary_vocab, ck.model));
        const double loaded = training::validation_loss(ck, enc, false);
        o.require(loaded == ck.best_valid_loss,
                  "validation loss " + num(loaded, 17) + " vs stored " + num(ck.best_valid_loss, 17));
        const auto bytes = training::serialize_checkpoint(ck);
        const auto again = training::deserialize_checkpoint(bytes);
        o.require(training::validation_loss(again, enc, false) == loaded, "second round trip changed the loss");
        o.require(training::serialize_checkpoint(again) == bytes, "re-serialized checkpoint differs");
        o.note("checkpoint, loss log, generations and report byte-identical; validation loss " + num(loaded, 17) +
               " preserved exactly");
    }
    fs::remove_all(root);
    return o;
}

} // namespace

int main(int argc, char** argv) {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
        {"gradient correctness", gradients},
        {"retrieval oracles", retrieval_oracles},
        {"pair construction", pair_construction},
        {"metric oracles", metric_oracles},
        {"memorization", memorization},
        {"pattern transfer", pattern_transfer},
        {"decoding", decoding},
        {"determinism and persistence", determinism},
    };
    std::set<std::size_t> selected;
    for (int i = 1; i < argc; ++i) selected.insert(std::stoul(argv[i]));
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        if (!selected.empty() && !selected.count(k + 1)) continue;
        Outcome o;
        try {
            o = criteria[k].second();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("exception: ") + e.what();
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
                  << "): " << o.detail << std::endl;
    }
    return failures ? 1 : 0;
}
