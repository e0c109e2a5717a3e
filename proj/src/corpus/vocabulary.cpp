#include "editsum/corpus.hpp"
#include "editsum/error.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <ostream>

namespace editsum::corpus {

Vocabulary::Vocabulary() {
    for (auto surface : kSpecialSurface) {
        token_to_id_.emplace(std::string(surface), static_cast<TokenId>(id_to_token_.size()));
        id_to_token_.emplace_back(surface);
    }
}

Vocabulary::Vocabulary(const std::vector<Token>& tokens) : Vocabulary() {
    for (const auto& t : tokens) {
        auto [it, inserted] = token_to_id_.emplace(t, static_cast<TokenId>(id_to_token_.size()));
        if (!inserted) throw DataError("duplicate vocabulary entry: " + t);
        id_to_token_.push_back(t);
    }
}

TokenId Vocabulary::id(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    return it == token_to_id_.end() ? kUnk : it->second;
}

bool Vocabulary::contains(std::string_view token) const {
    return token_to_id_.contains(std::string(token));
}

const Token& Vocabulary::token(TokenId id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= id_to_token_.size())
        throw IndexOutOfVocab("token id " + std::to_string(id) + " outside vocabulary of size " +
                              std::to_string(id_to_token_.size()));
    return id_to_token_[static_cast<std::size_t>(id)];
}

Ids Vocabulary::encode(std::span<const Token> tokens, bool add_bos_eos) const {
    Ids out;
    out.reserve(tokens.size() + 2);
    if (add_bos_eos) out.push_back(kBos);
    for (const auto& t : tokens) out.push_back(id(t));
    if (add_bos_eos) out.push_back(kEos);
    return out;
}

Tokens Vocabulary::decode(std::span<const TokenId> ids, bool strip_specials) const {
    Tokens out;
    out.reserve(ids.size());
    for (TokenId i : ids) {
        if (strip_specials && (i == kPad || i == kBos || i == kEos)) continue;
        out.push_back(token(i));
    }
    return out;
}

void Vocabulary::write(std::ostream& out) const {
    for (const auto& t : id_to_token_) out << t << '\n';
}

Vocabulary Vocabulary::read(std::istream& in) {
    std::vector<Token> lines;
    std::string line;
    while (std::getline(in, line)) lines.push_back(line);
    if (lines.size() < kNumSpecials) throw DataError("vocabulary file shorter than the special block");
    for (std::size_t i = 0; i < kNumSpecials; ++i)
        if (lines[i] != kSpecialSurface[i])
            throw DataError("vocabulary line " + std::to_string(i) + " must be " +
                            std::string(kSpecialSurface[i]));
    return Vocabulary(std::vector<Token>(lines.begin() + kNumSpecials, lines.end()));
}

void Vocabulary::save(const std::filesystem::path& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write " + path.string());
    write(out);
}

Vocabulary Vocabulary::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot read " + path.string());
    return read(in);
}

Vocabulary build_vocab(std::span<const Tokens> corpus, std::size_t max_size) {
    if (max_size < Vocabulary::kNumSpecials)
        throw UsageError("vocabulary max_size must leave room for the 4 specials");
    std::unordered_map<Token, std::size_t> counts;
    for (const auto& seq : corpus)
        for (const auto& t : seq) ++counts[t];
    for (auto s : Vocabulary::kSpecialSurface) counts.erase(std::string(s));

    std::vector<std::pair<Token, std::size_t>> ranked(counts.begin(), counts.end());
    std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
        return a.second != b.second ? a.second > b.second : a.first < b.first;
    });
    const std::size_t keep = std::min(ranked.size(), max_size - Vocabulary::kNumSpecials);
    std::vector<Token> kept;
    kept.reserve(keep);
    for (std::size_t i = 0; i < keep; ++i) kept.push_back(std::move(ranked[i].first));
    return Vocabulary(kept);
}

} // namespace editsum::corpus
