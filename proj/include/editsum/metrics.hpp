#pragma once

#include "editsum/corpus.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace editsum::metrics {

using corpus::Token;
using corpus::Tokens;

enum class BleuLevel { corpus, sentence };

/// BLEU-1..BLEU-max_n as percentages; `scores[n-1]` is BLEU-n.
///
/// Corpus level pools clipped n-gram matches over all samples and applies
/// one brevity penalty to the pooled lengths. Sentence level scores each
/// pair with add-one smoothing on the n >= 2 precisions and averages.
/// Throws LengthMismatch when the two lists differ in size or are empty.
std::vector<double> bleu(std::span<const Tokens> candidates, std::span<const Tokens> references,
                         std::size_t max_n = 4, BleuLevel level = BleuLevel::corpus);

/// Smoothed sentence BLEU-1..max_n (percentages) for one pair.
std::vector<double> sentence_bleu(std::span<const Token> candidate, std::span<const Token> reference,
                                  std::size_t max_n = 4);

struct MeteorConfig {
    double alpha = 0.9;
    double beta = 3.0;
    double gamma = 0.5;
};

// Exact-match unigram alignment with the most matches and, among those, the
// fewest chunks.
struct Alignment {
    std::size_t matches = 0;
    std::size_t chunks = 0;
};
Alignment meteor_alignment(std::span<const Token> candidate, std::span<const Token> reference);

/// METEOR in [0,1], exact surface matching only.
double meteor(std::span<const Token> candidate, std::span<const Token> reference,
              const MeteorConfig& config = {});

std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b);

/// ROUGE-L in [0,1] with beta = P_lcs / R_lcs.
double rouge_l(std::span<const Token> candidate, std::span<const Token> reference);

/// Weighted LCS score with f(k) = k^weight_exponent.
double wlcs(std::span<const Token> candidate, std::span<const Token> reference,
            double weight_exponent = 1.2);

/// ROUGE-W in [0,1]: P and R through f^-1, combined by their harmonic mean.
double rouge_w(std::span<const Token> candidate, std::span<const Token> reference,
               double weight_exponent = 1.2);

inline constexpr std::size_t kKeywordThresholds[] = {10, 20, 50, 100};

struct KeywordBucketReport {
    // threshold -> number of correctly generated words with training
    // frequency below the threshold, summed over samples
    std::map<std::size_t, std::size_t> buckets;
};

std::unordered_map<Token, std::size_t> token_frequencies(std::span<const Tokens> summaries);

KeywordBucketReport keyword_bucket_analysis(
    std::span<const Tokens> generated, std::span<const Tokens> references,
    const std::unordered_map<Token, std::size_t>& train_token_freq);

struct LengthBin {
    std::string label;
    std::size_t lo = 0; // inclusive
    std::size_t hi = 0; // inclusive
    std::size_t count = 0;
    double mean_bleu = 0.0; // smoothed sentence BLEU-4, percent
};

struct EvalReport {
    double bleu1 = 0, bleu2 = 0, bleu3 = 0, bleu4 = 0;
    double meteor = 0;
    double rouge_l = 0;
    double rouge_w = 0;
    std::size_t n_samples = 0;
    std::vector<LengthBin> by_code_length;
    std::vector<LengthBin> by_summary_length;
};

/// Full report; all scores are percentages. `code_lengths` (token counts of
/// the input code, one per sample) may be empty, in which case the
/// code-length breakdown is omitted.
EvalReport evaluate(std::span<const Tokens> candidates, std::span<const Tokens> references,
                    std::span<const std::size_t> code_lengths = {});

std::string report_to_json(const EvalReport& report);

} // namespace editsum::metrics
