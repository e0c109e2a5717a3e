#include "editsum/error.hpp"
#include "editsum/io.hpp"
#include "editsum/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace editsum::retrieval {

namespace {

constexpr std::string_view kMagic = "EDSIDX1";
constexpr std::uint32_t kVersion = 1;

} // namespace

Field parse_field(std::string_view name) {
    if (name == "code") return Field::code;
    if (name == "summary") return Field::summary;
    throw UsageError("unknown field '" + std::string(name) + "' (expected code or summary)");
}

std::string_view field_name(Field f) { return f == Field::code ? "code" : "summary"; }

std::size_t InvertedIndex::doc_index(std::string_view id) const {
    const auto it = id_to_doc_.find(std::string(id));
    return it == id_to_doc_.end() ? npos : it->second;
}

std::span<const Posting> InvertedIndex::postings(std::string_view term) const {
    const auto it = postings_.find(std::string(term));
    if (it == postings_.end()) return {};
    return it->second;
}

double InvertedIndex::idf(std::string_view term) const {
    const double n = static_cast<double>(document_frequency(term));
    const double N = static_cast<double>(n_docs());
    return std::log((N - n + 0.5) / (n + 0.5) + 1.0);
}

double InvertedIndex::term_weight(double idf, std::uint32_t tf, std::uint32_t len) const {
    const double ratio = avg_len_ > 0.0 ? static_cast<double>(len) / avg_len_ : 1.0;
    const double f = static_cast<double>(tf);
    return idf * f * (k1_ + 1.0) / (f + k1_ * (1.0 - b_ + b_ * ratio));
}

std::vector<Token> InvertedIndex::terms() const {
    std::vector<Token> out;
    out.reserve(postings_.size());
    for (const auto& [t, _] : postings_) out.push_back(t);
    std::sort(out.begin(), out.end());
    return out;
}

void InvertedIndex::finish() {
    double total = 0.0;
    for (auto len : doc_len_) total += len;
    avg_len_ = doc_len_.empty() ? 0.0 : total / static_cast<double>(doc_len_.size());
    id_to_doc_.clear();
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        if (!id_to_doc_.emplace(doc_ids_[d], static_cast<std::uint32_t>(d)).second)
            throw DataError("index: duplicate doc id '" + doc_ids_[d] + "'");
    }
}

InvertedIndex build_index(std::span<const TokenizedPair> pairs, Field field, double k1, double b) {
    if (pairs.empty()) throw EmptyCorpus("build_index: no documents");
    InvertedIndex ix;
    ix.field_ = field;
    ix.k1_ = k1;
    ix.b_ = b;
    ix.doc_ids_.reserve(pairs.size());
    for (std::size_t d = 0; d < pairs.size(); ++d) {
        const auto& toks = field == Field::code ? pairs[d].code_tokens : pairs[d].summary_tokens;
        ix.doc_ids_.push_back(pairs[d].id);
        ix.doc_len_.push_back(static_cast<std::uint32_t>(toks.size()));
        std::map<std::string_view, std::uint32_t> tf;
        for (const auto& t : toks) ++tf[t];
        for (const auto& [t, n] : tf)
            ix.postings_[std::string(t)].push_back({static_cast<std::uint32_t>(d), n});
    }
    ix.finish();
    return ix;
}

double bm25_score(const InvertedIndex& index, std::span<const Token> query, std::string_view doc_id) {
    const std::size_t doc = index.doc_index(doc_id);
    if (doc == InvertedIndex::npos) throw UnknownDoc("bm25_score: unknown doc '" + std::string(doc_id) + "'");
    double score = 0.0;
    for (const auto& t : query) {
        const auto plist = index.postings(t);
        const auto it = std::lower_bound(plist.begin(), plist.end(), doc,
                                         [](const Posting& p, std::size_t d) { return p.doc < d; });
        if (it == plist.end() || it->doc != doc) continue;
        score += index.term_weight(index.idf(t), it->tf, index.doc_len(doc));
    }
    return score;
}

std::vector<RetrievalHit> query_top_k(const InvertedIndex& index, std::span<const Token> query,
                                      std::size_t k, std::optional<std::string_view> exclude_id) {
    if (k == 0) throw UsageError("query_top_k: k must be at least 1");
    std::vector<double> acc(index.n_docs(), 0.0);
    std::vector<std::uint32_t> touched;
    for (const auto& t : query) {
        const auto plist = index.postings(t);
        if (plist.empty()) continue;
        const double idf = index.idf(t);
        for (const auto& p : plist) {
            if (acc[p.doc] == 0.0) touched.push_back(p.doc);
            acc[p.doc] += index.term_weight(idf, p.tf, index.doc_len(p.doc));
        }
    }
    const std::size_t skip = exclude_id ? index.doc_index(*exclude_id) : InvertedIndex::npos;
    std::vector<std::uint32_t> cand;
    cand.reserve(touched.size());
    for (auto d : touched)
        if (d != skip && acc[d] > 0.0) cand.push_back(d);
    const auto better = [&](std::uint32_t a, std::uint32_t b) {
        if (acc[a] != acc[b]) return acc[a] > acc[b];
        return index.doc_id(a) < index.doc_id(b);
    };
    const std::size_t n = std::min(k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(n), cand.end(), better);
    std::vector<RetrievalHit> hits;
    hits.reserve(n);
    for (std::size_t i = 0; i < n; ++i) hits.push_back({index.doc_id(cand[i]), acc[cand[i]]});
    return hits;
}

std::string InvertedIndex::serialize() const {
    io::Writer w;
    w.bytes(kMagic);
    w.put<std::uint32_t>(kVersion);
    w.put<std::uint8_t>(static_cast<std::uint8_t>(field_));
    w.put<double>(k1_);
    w.put<double>(b_);
    w.put<std::uint64_t>(doc_ids_.size());
    w.put<std::uint64_t>(postings_.size());
    for (std::size_t d = 0; d < doc_ids_.size(); ++d) {
        w.str(doc_ids_[d]);
        w.put<std::uint32_t>(doc_len_[d]);
    }
    for (const auto& term : terms()) {
        const auto& plist = postings_.at(term);
        w.str(term);
        w.put<std::uint32_t>(static_cast<std::uint32_t>(plist.size()));
        std::uint32_t prev = 0;
        for (const auto& p : plist) {
            w.put<std::uint32_t>(p.doc - prev);
            w.put<std::uint32_t>(p.tf);
            prev = p.doc;
        }
    }
    return w.take();
}

InvertedIndex InvertedIndex::deserialize(std::string_view bytes) {
    io::Reader r(bytes, "index");
    if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw CorruptFile("index: bad magic");
    const auto version = r.get<std::uint32_t>();
    if (version != kVersion)
        throw VersionMismatch("index: version " + std::to_string(version) + ", expected " +
                              std::to_string(kVersion));
    InvertedIndex ix;
    const auto field = r.get<std::uint8_t>();
    if (field > 1) throw CorruptFile("index: bad field tag");
    ix.field_ = static_cast<Field>(field);
    ix.k1_ = r.get<double>();
    ix.b_ = r.get<double>();
    const auto n_docs = r.get<std::uint64_t>();
    const auto n_terms = r.get<std::uint64_t>();
    if (n_docs > r.remaining() || n_terms > r.remaining()) throw CorruptFile("index: bad counts");
    for (std::uint64_t d = 0; d < n_docs; ++d) {
        ix.doc_ids_.push_back(r.str());
        ix.doc_len_.push_back(r.get<std::uint32_t>());
    }
    for (std::uint64_t t = 0; t < n_terms; ++t) {
        auto term = r.str();
        const auto df = r.get<std::uint32_t>();
        if (df == 0 || df > n_docs) throw CorruptFile("index: bad document frequency for '" + term + "'");
        std::vector<Posting> plist(df);
        std::uint64_t doc = 0;
        for (std::uint32_t i = 0; i < df; ++i) {
            doc += r.get<std::uint32_t>();
            const auto tf = r.get<std::uint32_t>();
            if (doc >= n_docs || tf == 0 || (i > 0 && doc <= plist[i - 1].doc))
                throw CorruptFile("index: bad posting for '" + term + "'");
            plist[i] = {static_cast<std::uint32_t>(doc), tf};
        }
        if (!ix.postings_.emplace(std::move(term), std::move(plist)).second)
            throw CorruptFile("index: repeated term");
    }
    if (!r.done()) throw CorruptFile("index: trailing bytes");
    ix.finish();
    return ix;
}

void InvertedIndex::save(const std::filesystem::path& path) const { io::write_file(path, serialize()); }

InvertedIndex InvertedIndex::load(const std::filesystem::path& path) {
    return deserialize(io::read_file(path));
}

} // namespace editsum::retrieval
