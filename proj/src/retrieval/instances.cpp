#include "editsum/error.hpp"
#include "editsum/retrieval.hpp"

#include <json.hpp>

#include <algorithm>
#include <exception>
#include <fstream>
#include <set>
#include <unordered_map>

namespace editsum::retrieval {

double jaccard(std::span<const Token> a, std::span<const Token> b) {
    const std::set<std::string_view> sa(a.begin(), a.end());
    const std::set<std::string_view> sb(b.begin(), b.end());
    if (sa.empty() && sb.empty()) return 0.0;
    std::size_t inter = 0;
    for (const auto& t : sa) inter += sb.count(t);
    return static_cast<double>(inter) / static_cast<double>(sa.size() + sb.size() - inter);
}

namespace {

// Index doc position -> split position; every indexed doc must be in the split.
std::vector<std::size_t> doc_to_pair(const InvertedIndex& index, const DatasetSplit& split) {
    std::unordered_map<std::string_view, std::size_t> by_id;
    for (std::size_t i = 0; i < split.pairs.size(); ++i) by_id.emplace(split.pairs[i].id, i);
    std::vector<std::size_t> map(index.n_docs());
    for (std::size_t d = 0; d < index.n_docs(); ++d) {
        const auto it = by_id.find(index.doc_id(d));
        if (it == by_id.end())
            throw DataError("index doc '" + index.doc_id(d) + "' is not in the training corpus");
        map[d] = it->second;
    }
    return map;
}

// Top-1 doc position and score, or the smallest-id doc with score 0.
std::pair<std::size_t, double> top_doc(const InvertedIndex& index, std::span<const Token> query,
                                       std::optional<std::string_view> exclude_id) {
    if (index.n_docs() == 0) throw EmptyIndex("retrieve_prototype: index has no documents");
    const auto hits = query_top_k(index, query, 1, exclude_id);
    if (!hits.empty()) return {index.doc_index(hits[0].doc_id), hits[0].score};
    std::size_t doc = InvertedIndex::npos;
    for (std::size_t d = 0; d < index.n_docs(); ++d) {
        if (exclude_id && index.doc_id(d) == *exclude_id) continue;
        if (doc == InvertedIndex::npos || index.doc_id(d) < index.doc_id(doc)) doc = d;
    }
    if (doc == InvertedIndex::npos) throw EmptyIndex("retrieve_prototype: no candidate besides the query");
    return {doc, 0.0};
}

TrainingInstance make_instance(const TokenizedPair& src, const TokenizedPair& proto) {
    return {src.id, proto.id, src.code_tokens, src.summary_tokens, proto.code_tokens,
            proto.summary_tokens};
}

template <class PerPair>
std::vector<TrainingInstance> collect(std::size_t n, Execution exec, PerPair per_pair) {
    std::vector<std::vector<TrainingInstance>> per(n);
    const auto count = static_cast<long long>(n);
    if (exec == Execution::parallel) {
        std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 16)
        for (long long i = 0; i < count; ++i) {
            try {
                per[i] = per_pair(static_cast<std::size_t>(i));
            } catch (...) {
#pragma omp critical(editsum_instances)
                if (!failure) failure = std::current_exception();
            }
        }
        if (failure) std::rethrow_exception(failure);
    } else {
        for (long long i = 0; i < count; ++i) per[i] = per_pair(static_cast<std::size_t>(i));
    }
    std::vector<TrainingInstance> out;
    std::size_t total = 0;
    for (const auto& v : per) total += v.size();
    out.reserve(total);
    for (auto& v : per)
        for (auto& inst : v) out.push_back(std::move(inst));
    return out;
}

} // namespace

std::vector<TrainingInstance> build_training_instances(const DatasetSplit& train,
                                                       const InvertedIndex& summary_index,
                                                       const PairConfig& config, Execution exec) {
    if (config.top_k == 0) throw UsageError("make-pairs: top_k must be at least 1");
    if (!(config.j_min <= config.j_max)) throw UsageError("make-pairs: j_min must not exceed j_max");
    if (summary_index.field() != Field::summary)
        throw UsageError("make-pairs: summary mode needs a summary index");
    const auto pos = doc_to_pair(summary_index, train);
    return collect(train.pairs.size(), exec, [&](std::size_t i) {
        const auto& src = train.pairs[i];
        std::vector<TrainingInstance> out;
        for (const auto& hit : query_top_k(summary_index, src.summary_tokens, config.top_k, src.id)) {
            const auto& proto = train.pairs[pos[summary_index.doc_index(hit.doc_id)]];
            const double j = jaccard(src.summary_tokens, proto.summary_tokens);
            if (j >= config.j_min && j <= config.j_max) out.push_back(make_instance(src, proto));
        }
        return out;
    });
}

Prototype retrieve_prototype(const InvertedIndex& code_index, const DatasetSplit& train,
                             std::span<const Token> input_code_tokens,
                             std::optional<std::string_view> exclude_id) {
    const auto [doc, score] = top_doc(code_index, input_code_tokens, exclude_id);
    const std::size_t p = train.find(code_index.doc_id(doc));
    if (p == DatasetSplit::npos)
        throw DataError("index doc '" + code_index.doc_id(doc) + "' is not in the training corpus");
    const auto& pair = train.pairs[p];
    return {pair.id, pair.code_tokens, pair.summary_tokens, score};
}

std::vector<TrainingInstance> build_code_instances(const DatasetSplit& queries,
                                                   const DatasetSplit& train,
                                                   const InvertedIndex& code_index, bool exclude_self,
                                                   Execution exec) {
    if (code_index.field() != Field::code) throw UsageError("code mode needs a code index");
    const auto pos = doc_to_pair(code_index, train);
    return collect(queries.pairs.size(), exec, [&](std::size_t i) {
        const auto& src = queries.pairs[i];
        const auto exclude = exclude_self ? std::optional<std::string_view>(src.id) : std::nullopt;
        const auto doc = top_doc(code_index, src.code_tokens, exclude).first;
        return std::vector<TrainingInstance>{make_instance(src, train.pairs[pos[doc]])};
    });
}

void write_instances(const std::filesystem::path& path, std::span<const TrainingInstance> instances) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write " + path.string());
    for (const auto& inst : instances) {
        nlohmann::ordered_json j;
        j["src_id"] = inst.src_id;
        j["proto_id"] = inst.proto_id;
        j["x"] = inst.x;
        j["y"] = inst.y;
        j["x_prime"] = inst.x_prime;
        j["y_prime"] = inst.y_prime;
        out << j.dump() << '\n';
    }
    if (!out) throw DataError("write failed: " + path.string());
}

std::vector<TrainingInstance> read_instances(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open " + path.string());
    std::vector<TrainingInstance> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TrainingInstance inst;
            inst.src_id = j.at("src_id").get<std::string>();
            inst.proto_id = j.at("proto_id").get<std::string>();
            inst.x = j.at("x").get<Tokens>();
            inst.y = j.at("y").get<Tokens>();
            inst.x_prime = j.at("x_prime").get<Tokens>();
            inst.y_prime = j.at("y_prime").get<Tokens>();
            out.push_back(std::move(inst));
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

} // namespace editsum::retrieval
