#include "editsum/corpus.hpp"

#include <cctype>

namespace editsum::corpus {

namespace {

enum class CharClass { other, lower, upper, digit };

CharClass classify(char ch) {
    const auto c = static_cast<unsigned char>(ch);
    if (c >= 'a' && c <= 'z') return CharClass::lower;
    if (c >= 'A' && c <= 'Z') return CharClass::upper;
    if (c >= '0' && c <= '9') return CharClass::digit;
    return CharClass::other;
}

bool is_letter(CharClass c) { return c == CharClass::lower || c == CharClass::upper; }

// Splits one alphanumeric run into identifier pieces.
void split_word(std::string_view word, Tokens& out, std::size_t max_len) {
    std::size_t start = 0;
    const auto emit = [&](std::size_t end) {
        if (end > start && out.size() < max_len) {
            std::string piece(word.substr(start, end - start));
            for (auto& ch : piece) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
            out.push_back(std::move(piece));
        }
        start = end;
    };
    for (std::size_t i = 1; i < word.size(); ++i) {
        const CharClass prev = classify(word[i - 1]);
        const CharClass cur = classify(word[i]);
        if (prev == CharClass::lower && cur == CharClass::upper) {
            emit(i);
        } else if (prev == CharClass::upper && cur == CharClass::upper && i + 1 < word.size() &&
                   classify(word[i + 1]) == CharClass::lower) {
            // acronym run followed by a capitalized word: HTTPServer
            emit(i);
        } else if ((is_letter(prev) && cur == CharClass::digit) ||
                   (prev == CharClass::digit && is_letter(cur))) {
            emit(i);
        }
    }
    emit(word.size());
}

Tokens split_identifiers(std::string_view text, std::size_t max_len) {
    Tokens out;
    std::size_t i = 0;
    while (i < text.size() && out.size() < max_len) {
        if (classify(text[i]) == CharClass::other) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < text.size() && classify(text[j]) != CharClass::other) ++j;
        split_word(text.substr(i, j - i), out, max_len);
        i = j;
    }
    return out;
}

} // namespace

Tokens tokenize_code(std::string_view code_text, std::size_t max_len) {
    return split_identifiers(code_text, max_len);
}

Tokens tokenize_summary(std::string_view summary_text, std::size_t max_len) {
    return split_identifiers(summary_text, max_len);
}

TokenizedPair tokenize_pair(const RawPair& raw, std::size_t max_code_len,
                            std::size_t max_summary_len) {
    return TokenizedPair{raw.id, tokenize_code(raw.code, max_code_len),
                         tokenize_summary(raw.summary, max_summary_len)};
}

std::string join(std::span<const Token> tokens, char sep) {
    std::string out;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
        if (i) out.push_back(sep);
        out += tokens[i];
    }
    return out;
}

} // namespace editsum::corpus
