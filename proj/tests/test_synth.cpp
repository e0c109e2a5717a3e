#include "editsum/error.hpp"
#include "editsum/retrieval.hpp"
#include "editsum/synth.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

using namespace editsum;
namespace r = editsum::retrieval;

namespace {

std::map<std::string, std::size_t> filler_counts(const std::vector<corpus::RawPair>& pairs,
                                                 const std::vector<std::string>& fillers) {
    std::map<std::string, std::size_t> n;
    for (const auto& p : pairs) {
        const auto toks = corpus::tokenize_summary(p.summary);
        for (const auto& f : fillers)
            if (std::find(toks.begin(), toks.end(), f) != toks.end()) ++n[f];
    }
    return n;
}

// BM25 with document frequencies counted up front, every doc scored.
struct Bm25Oracle {
    std::vector<corpus::Tokens> docs;
    std::map<std::string, std::size_t> df;
    double avg = 0;

    explicit Bm25Oracle(const corpus::DatasetSplit& s) {
        for (const auto& p : s.pairs) {
            docs.push_back(p.summary_tokens);
            avg += static_cast<double>(p.summary_tokens.size());
            for (const auto& t : std::set<std::string>(p.summary_tokens.begin(), p.summary_tokens.end())) ++df[t];
        }
        avg /= static_cast<double>(docs.size());
    }
    double score(const corpus::Tokens& q, std::size_t d) const {
        const double N = static_cast<double>(docs.size());
        double s = 0;
        for (const auto& t : q) {
            const double tf = static_cast<double>(std::count(docs[d].begin(), docs[d].end(), t));
            if (tf == 0) continue;
            const double n = static_cast<double>(df.at(t));
            const double idf = std::log((N - n + 0.5) / (n + 0.5) + 1.0);
            s += idf * tf * 2.2 / (tf + 1.2 * (0.25 + 0.75 * static_cast<double>(docs[d].size()) / avg));
        }
        return s;
    }
};

double jaccard(const corpus::Tokens& a, const corpus::Tokens& b) {
    const std::set<std::string> sa(a.begin(), a.end()), sb(b.begin(), b.end());
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    const std::size_t uni = sa.size() + sb.size() - inter;
    return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

} // namespace

TEST_CASE("synthetic corpus is deterministic and sized") {
    synth::SynthConfig cfg;
    const auto a = synth::generate(cfg);
    const auto b = synth::generate(cfg);
    CHECK(a.train.size() == 1600);
    CHECK(a.valid.size() == 200);
    CHECK(a.test.size() == 200);
    CHECK(a.rare.size() == 40);
    CHECK(std::is_sorted(a.rare.begin(), a.rare.end()));
    for (std::size_t i = 0; i < a.train.size(); ++i) {
        CHECK(a.train[i].id == b.train[i].id);
        CHECK(a.train[i].code == b.train[i].code);
        CHECK(a.train[i].summary == b.train[i].summary);
    }
    cfg.seed = 2;
    const auto c = synth::generate(cfg);
    CHECK(c.train[0].summary + c.train[1].summary != a.train[0].summary + a.train[1].summary);
    CHECK(synth::template_count() == 9);
    CHECK(synth::filler_count() > 100);
}

TEST_CASE("held-out pairs use unseen template and filler combinations") {
    const auto c = synth::generate({});
    std::set<std::string> ids;
    for (const auto* split : {&c.train, &c.valid, &c.test})
        for (const auto& p : *split) CHECK(ids.insert(p.id).second);

    // first summary word names the template; the filler is the first word
    // that is not template text
    const std::set<std::string> lead = {"write", "convert", "returns", "the",     "sets",    "creates", "a",
                                        "new",   "checks",  "whether", "load",    "removes", "prints"};
    const auto combo = [&](const corpus::RawPair& p) {
        const auto toks = corpus::tokenize_summary(p.summary);
        for (const auto& t : toks)
            if (!lead.count(t)) return std::make_pair(toks[0], t);
        return std::make_pair(toks[0], std::string());
    };
    std::set<std::pair<std::string, std::string>> seen;
    for (const auto& p : c.train) seen.insert(combo(p));
    CHECK(seen.size() > 100);
    const std::set<std::string> rare(c.rare.begin(), c.rare.end());
    std::size_t rare_used = 0;
    for (const auto* split : {&c.valid, &c.test})
        for (const auto& p : *split) {
            const auto k = combo(p);
            REQUIRE(!k.second.empty());
            CHECK(seen.count(k) == 0);
            rare_used += rare.count(k.second);
        }
    // half of the 400 held-out pairs by default
    CHECK(rare_used > 150);
    CHECK(rare_used < 250);
}

TEST_CASE("rare fillers occur a bounded number of times in training") {
    synth::SynthConfig cfg;
    const auto c = synth::generate(cfg);
    const auto n = filler_counts(c.train, c.rare);
    for (const auto& f : c.rare) {
        CHECK(n.count(f) == 1);
        CHECK(n.at(f) >= cfg.rare_min);
        CHECK(n.at(f) <= cfg.rare_max);
    }
}

TEST_CASE("infeasible configurations are rejected") {
    synth::SynthConfig cfg;
    cfg.rare_fillers = 1000;
    CHECK_THROWS_AS(synth::generate(cfg), UsageError);
    cfg = {};
    cfg.train_pairs = 10;
    CHECK_THROWS_AS(synth::generate(cfg), UsageError);
    cfg = {};
    cfg.rare_min = 9;
    CHECK_THROWS_AS(synth::generate(cfg), UsageError);
}

TEST_CASE("pair construction on the synthetic fixture matches brute force") {
    const auto c = synth::generate({});
    const auto train = corpus::make_split(corpus::SplitName::train, c.train);
    const auto index = r::build_index(train.pairs, r::Field::summary);
    const auto got = r::build_training_instances(train, index);
    REQUIRE(!got.empty());

    const Bm25Oracle bm(train);
    std::vector<std::pair<std::string, std::string>> want;
    for (std::size_t i = 0; i < train.pairs.size(); ++i) {
        std::vector<std::pair<double, std::size_t>> scored;
        for (std::size_t d = 0; d < train.pairs.size(); ++d) {
            if (d == i) continue;
            const double s = bm.score(train.pairs[i].summary_tokens, d);
            if (s > 0) scored.push_back({s, d});
        }
        // scores within 1e-9 count as tied so summation order cannot reorder them
        std::sort(scored.begin(), scored.end(), [&](const auto& a, const auto& b) {
            if (std::abs(a.first - b.first) > 1e-9 * std::max(1.0, std::abs(a.first))) return a.first > b.first;
            return train.pairs[a.second].id < train.pairs[b.second].id;
        });
        if (scored.size() > 20) scored.resize(20);
        for (const auto& [s, d] : scored) {
            const double j = jaccard(train.pairs[i].summary_tokens, train.pairs[d].summary_tokens);
            if (j >= 0.3 && j <= 0.7) want.push_back({train.pairs[i].id, train.pairs[d].id});
        }
    }
    std::vector<std::pair<std::string, std::string>> have;
    for (const auto& inst : got) have.push_back({inst.src_id, inst.proto_id});
    CHECK(have.size() == want.size());
    CHECK(have == want);

    std::size_t bad = 0;
    for (const auto& inst : got) {
        const double j = jaccard(inst.y, inst.y_prime);
        bad += !(j >= 0.3 && j <= 0.7) || inst.src_id == inst.proto_id;
    }
    CHECK(bad == 0);
}
