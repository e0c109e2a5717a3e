#include "editsum/corpus.hpp"
#include "editsum/error.hpp"

#include <json.hpp>

#include <fstream>
#include <unordered_set>

namespace editsum::corpus {

namespace {

bool blank(std::string_view s) {
    return s.find_first_not_of(" \t\r\n") == std::string_view::npos;
}

} // namespace

std::size_t DatasetSplit::find(std::string_view id) const {
    for (std::size_t i = 0; i < pairs.size(); ++i)
        if (pairs[i].id == id) return i;
    return npos;
}

std::vector<RawPair> read_corpus(std::istream& in) {
    std::vector<RawPair> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (blank(line)) continue;
        nlohmann::json rec;
        try {
            rec = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw DataError("corpus line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("id") || !rec.contains("code"))
            throw DataError("corpus line " + std::to_string(line_no) +
                            ": record needs string fields id and code");
        RawPair p;
        p.id = rec.at("id").get<std::string>();
        p.code = rec.at("code").get<std::string>();
        if (rec.contains("summary")) p.summary = rec.at("summary").get<std::string>();
        out.push_back(std::move(p));
    }
    return out;
}

std::vector<RawPair> read_corpus(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read corpus " + path.string());
    return read_corpus(in);
}

void write_corpus(const std::filesystem::path& path, std::span<const RawPair> pairs) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write corpus " + path.string());
    for (const auto& p : pairs) {
        nlohmann::ordered_json rec;
        rec["id"] = p.id;
        rec["code"] = p.code;
        rec["summary"] = p.summary;
        out << rec.dump() << '\n';
    }
}

DatasetSplit make_split(SplitName name, std::span<const RawPair> raw, std::size_t max_code_len,
                        std::size_t max_summary_len) {
    DatasetSplit split{name, {}};
    split.pairs.reserve(raw.size());
    std::unordered_set<std::string> seen;
    for (const auto& p : raw) {
        if (!seen.insert(p.id).second) throw DataError("duplicate pair id: " + p.id);
        if (blank(p.code) || blank(p.summary))
            throw DataError("pair " + p.id + " has an empty code or summary field");
        split.pairs.push_back(tokenize_pair(p, max_code_len, max_summary_len));
    }
    return split;
}

DatasetSplit load_split(const std::filesystem::path& path, SplitName name,
                        std::size_t max_code_len, std::size_t max_summary_len) {
    const auto raw = read_corpus(path);
    return make_split(name, raw, max_code_len, max_summary_len);
}

} // namespace editsum::corpus
