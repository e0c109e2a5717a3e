#include "editsum/error.hpp"
#include "editsum/metrics.hpp"

#include <algorithm>
#include <cmath>

namespace editsum::metrics {

namespace {

struct NgramStats {
    std::vector<std::size_t> matched; // clipped matches per order
    std::vector<std::size_t> total;   // candidate n-grams per order
    std::size_t cand_len = 0;
    std::size_t ref_len = 0;
};

std::string ngram_key(std::span<const Token> toks, std::size_t start, std::size_t n) {
    std::string key;
    for (std::size_t i = 0; i < n; ++i) {
        key += toks[start + i];
        key.push_back('\x1f');
    }
    return key;
}

NgramStats collect(std::span<const Token> cand, std::span<const Token> ref, std::size_t max_n) {
    NgramStats s;
    s.matched.assign(max_n, 0);
    s.total.assign(max_n, 0);
    s.cand_len = cand.size();
    s.ref_len = ref.size();
    for (std::size_t n = 1; n <= max_n; ++n) {
        if (cand.size() < n) break;
        std::unordered_map<std::string, std::size_t> ref_counts;
        for (std::size_t i = 0; i + n <= ref.size(); ++i) ++ref_counts[ngram_key(ref, i, n)];
        std::unordered_map<std::string, std::size_t> cand_counts;
        for (std::size_t i = 0; i + n <= cand.size(); ++i) ++cand_counts[ngram_key(cand, i, n)];
        for (const auto& [key, c] : cand_counts) {
            auto it = ref_counts.find(key);
            if (it != ref_counts.end()) s.matched[n - 1] += std::min(c, it->second);
        }
        s.total[n - 1] = cand.size() - n + 1;
    }
    return s;
}

double brevity_penalty(std::size_t cand_len, std::size_t ref_len) {
    if (cand_len == 0) return 0.0;
    if (cand_len > ref_len) return 1.0;
    return std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
}

// BLEU-1..max_n from (possibly smoothed) precisions.
std::vector<double> combine(const std::vector<double>& precisions, double bp) {
    std::vector<double> out(precisions.size(), 0.0);
    double log_sum = 0.0;
    bool zero = false;
    for (std::size_t n = 1; n <= precisions.size(); ++n) {
        if (precisions[n - 1] <= 0.0) zero = true;
        if (!zero) log_sum += std::log(precisions[n - 1]);
        out[n - 1] = zero ? 0.0 : 100.0 * bp * std::exp(log_sum / static_cast<double>(n));
    }
    return out;
}

} // namespace

std::vector<double> sentence_bleu(std::span<const Token> candidate, std::span<const Token> reference,
                                  std::size_t max_n) {
    const auto s = collect(candidate, reference, max_n);
    std::vector<double> p(max_n, 0.0);
    for (std::size_t n = 1; n <= max_n; ++n) {
        const double m = static_cast<double>(s.matched[n - 1]);
        const double t = static_cast<double>(s.total[n - 1]);
        if (n == 1)
            p[0] = t > 0 ? m / t : 0.0;
        else
            p[n - 1] = (m + 1.0) / (t + 1.0);
    }
    return combine(p, brevity_penalty(s.cand_len, s.ref_len));
}

std::vector<double> bleu(std::span<const Tokens> candidates, std::span<const Tokens> references,
                         std::size_t max_n, BleuLevel level) {
    if (candidates.size() != references.size() || candidates.empty())
        throw LengthMismatch("bleu: " + std::to_string(candidates.size()) + " candidates vs " +
                             std::to_string(references.size()) + " references");
    if (level == BleuLevel::sentence) {
        std::vector<double> mean(max_n, 0.0);
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto s = sentence_bleu(candidates[i], references[i], max_n);
            for (std::size_t n = 0; n < max_n; ++n) mean[n] += s[n];
        }
        for (auto& m : mean) m /= static_cast<double>(candidates.size());
        return mean;
    }
    std::vector<NgramStats> per(candidates.size());
    const auto count = static_cast<long long>(candidates.size());
#pragma omp parallel for schedule(dynamic, 64)
    for (long long i = 0; i < count; ++i) per[i] = collect(candidates[i], references[i], max_n);

    std::vector<std::size_t> matched(max_n, 0), total(max_n, 0);
    std::size_t cand_len = 0, ref_len = 0;
    for (const auto& s : per) {
        for (std::size_t n = 0; n < max_n; ++n) {
            matched[n] += s.matched[n];
            total[n] += s.total[n];
        }
        cand_len += s.cand_len;
        ref_len += s.ref_len;
    }
    std::vector<double> p(max_n, 0.0);
    for (std::size_t n = 0; n < max_n; ++n)
        p[n] = total[n] ? static_cast<double>(matched[n]) / static_cast<double>(total[n]) : 0.0;
    return combine(p, brevity_penalty(cand_len, ref_len));
}

} // namespace editsum::metrics
