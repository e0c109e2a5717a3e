#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace editsum::corpus {

using Token = std::string;
using Tokens = std::vector<Token>;
using TokenId = std::int32_t;
using Ids = std::vector<TokenId>;

inline constexpr std::size_t kDefaultMaxCodeLen = 100;
inline constexpr std::size_t kDefaultMaxSummaryLen = 15;
inline constexpr std::size_t kDefaultVocabSize = 50000;

struct RawPair {
    std::string id;
    std::string code;
    std::string summary;
};

struct TokenizedPair {
    std::string id;
    Tokens code_tokens;
    Tokens summary_tokens;
};

enum class SplitName { train, valid, test };

struct DatasetSplit {
    SplitName name = SplitName::train;
    std::vector<TokenizedPair> pairs;

    // Index of the pair with the given id, or npos.
    [[nodiscard]] std::size_t find(std::string_view id) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

/// Identifier-aware splitter shared by code and summaries.
///
/// Splits on every non-alphanumeric byte (underscores included), on
/// lower-to-upper camel-case transitions, before the last capital of an
/// acronym run that is followed by a lowercase letter ("HTTPServer" gives
/// "http", "server"), and on letter/digit boundaries. Output is lowercase,
/// never contains empty tokens and is truncated to `max_len`.
Tokens tokenize_code(std::string_view code_text, std::size_t max_len = kDefaultMaxCodeLen);

/// Summaries go through the same splitter; punctuation is dropped.
Tokens tokenize_summary(std::string_view summary_text,
                        std::size_t max_len = kDefaultMaxSummaryLen);

TokenizedPair tokenize_pair(const RawPair& raw, std::size_t max_code_len = kDefaultMaxCodeLen,
                            std::size_t max_summary_len = kDefaultMaxSummaryLen);

class Vocabulary {
  public:
    static constexpr TokenId kPad = 0;
    static constexpr TokenId kUnk = 1;
    static constexpr TokenId kBos = 2;
    static constexpr TokenId kEos = 3;
    static constexpr std::size_t kNumSpecials = 4;
    static constexpr std::string_view kSpecialSurface[kNumSpecials] = {"<pad>", "<unk>", "<bos>",
                                                                      "<eos>"};

    Vocabulary();
    // Specials are prepended; `tokens` must be distinct and non-special.
    explicit Vocabulary(const std::vector<Token>& tokens);

    [[nodiscard]] std::size_t size() const { return id_to_token_.size(); }
    [[nodiscard]] TokenId id(std::string_view token) const;
    [[nodiscard]] bool contains(std::string_view token) const;
    [[nodiscard]] const Token& token(TokenId id) const;
    [[nodiscard]] const std::vector<Token>& tokens() const { return id_to_token_; }

    [[nodiscard]] Ids encode(std::span<const Token> tokens, bool add_bos_eos = false) const;
    // Maps ids back to surface forms; specials are rendered as their literals
    // unless `strip_specials` is set, in which case PAD/BOS/EOS are skipped.
    [[nodiscard]] Tokens decode(std::span<const TokenId> ids, bool strip_specials = false) const;

    void save(const std::filesystem::path& path) const;
    static Vocabulary load(const std::filesystem::path& path);
    void write(std::ostream& out) const;
    static Vocabulary read(std::istream& in);

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) {
        return a.id_to_token_ == b.id_to_token_;
    }

  private:
    std::vector<Token> id_to_token_;
    std::unordered_map<Token, TokenId> token_to_id_;
};

/// Keeps the `max_size - 4` most frequent tokens, ties broken by ascending
/// token; the four specials occupy ids 0..3.
Vocabulary build_vocab(std::span<const Tokens> corpus, std::size_t max_size = kDefaultVocabSize);

/// Line-delimited JSON records `{"id":..,"code":..,"summary":..}`.
std::vector<RawPair> read_corpus(const std::filesystem::path& path);
std::vector<RawPair> read_corpus(std::istream& in);
void write_corpus(const std::filesystem::path& path, std::span<const RawPair> pairs);

/// Tokenizes every pair and checks id uniqueness (throws DataError).
DatasetSplit make_split(SplitName name, std::span<const RawPair> raw,
                        std::size_t max_code_len = kDefaultMaxCodeLen,
                        std::size_t max_summary_len = kDefaultMaxSummaryLen);

DatasetSplit load_split(const std::filesystem::path& path, SplitName name = SplitName::train,
                        std::size_t max_code_len = kDefaultMaxCodeLen,
                        std::size_t max_summary_len = kDefaultMaxSummaryLen);

std::string join(std::span<const Token> tokens, char sep = ' ');

} // namespace editsum::corpus
