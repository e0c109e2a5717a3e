#include "editsum/error.hpp"
#include "editsum/metrics.hpp"

#include <json.hpp>

#include <set>

namespace editsum::metrics {

std::unordered_map<Token, std::size_t> token_frequencies(std::span<const Tokens> summaries) {
    std::unordered_map<Token, std::size_t> freq;
    for (const auto& s : summaries)
        for (const auto& t : s) ++freq[t];
    return freq;
}

KeywordBucketReport keyword_bucket_analysis(
    std::span<const Tokens> generated, std::span<const Tokens> references,
    const std::unordered_map<Token, std::size_t>& train_token_freq) {
    if (generated.size() != references.size())
        throw LengthMismatch("keyword analysis: " + std::to_string(generated.size()) +
                             " generated vs " + std::to_string(references.size()) + " references");
    KeywordBucketReport report;
    for (auto t : kKeywordThresholds) report.buckets[t] = 0;
    for (std::size_t i = 0; i < generated.size(); ++i) {
        const std::set<Token> gen(generated[i].begin(), generated[i].end());
        const std::set<Token> ref(references[i].begin(), references[i].end());
        for (const auto& w : gen) {
            if (!ref.contains(w)) continue;
            const auto it = train_token_freq.find(w);
            const std::size_t f = it == train_token_freq.end() ? 0 : it->second;
            for (auto t : kKeywordThresholds)
                if (f < t) ++report.buckets[t];
        }
    }
    return report;
}

namespace {

std::vector<LengthBin> make_bins(std::size_t width, std::size_t last_lo) {
    std::vector<LengthBin> bins;
    for (std::size_t lo = 1; lo <= last_lo; lo += width) {
        LengthBin b;
        b.lo = lo;
        b.hi = lo + width - 1;
        b.label = width == 1 ? std::to_string(lo) : std::to_string(lo) + "-" + std::to_string(b.hi);
        bins.push_back(b);
    }
    bins.back().hi = static_cast<std::size_t>(-1);
    bins.back().label = std::to_string(bins.back().lo) + "+";
    return bins;
}

void add_to_bins(std::vector<LengthBin>& bins, std::size_t len, double score) {
    for (auto& b : bins)
        if (len >= b.lo && len <= b.hi) {
            ++b.count;
            b.mean_bleu += score;
            return;
        }
}

void finish_bins(std::vector<LengthBin>& bins) {
    for (auto& b : bins)
        if (b.count) b.mean_bleu /= static_cast<double>(b.count);
}

} // namespace

EvalReport evaluate(std::span<const Tokens> candidates, std::span<const Tokens> references,
                    std::span<const std::size_t> code_lengths) {
    if (candidates.size() != references.size() || candidates.empty())
        throw LengthMismatch("evaluate: " + std::to_string(candidates.size()) + " generated vs " +
                             std::to_string(references.size()) + " references");
    if (!code_lengths.empty() && code_lengths.size() != candidates.size())
        throw LengthMismatch("evaluate: " + std::to_string(code_lengths.size()) +
                             " code lengths for " + std::to_string(candidates.size()) + " samples");
    EvalReport r;
    r.n_samples = candidates.size();
    const auto b = bleu(candidates, references, 4, BleuLevel::corpus);
    r.bleu1 = b[0];
    r.bleu2 = b[1];
    r.bleu3 = b[2];
    r.bleu4 = b[3];

    struct PerSample {
        double meteor, rouge_l, rouge_w, sbleu;
    };
    std::vector<PerSample> per(candidates.size());
    const auto count = static_cast<long long>(candidates.size());
#pragma omp parallel for schedule(dynamic, 32)
    for (long long i = 0; i < count; ++i) {
        per[i] = {meteor(candidates[i], references[i]), rouge_l(candidates[i], references[i]),
                  rouge_w(candidates[i], references[i]),
                  sentence_bleu(candidates[i], references[i], 4)[3]};
    }

    r.by_summary_length = make_bins(1, 16);
    if (!code_lengths.empty()) r.by_code_length = make_bins(10, 101);
    for (std::size_t i = 0; i < per.size(); ++i) {
        r.meteor += per[i].meteor;
        r.rouge_l += per[i].rouge_l;
        r.rouge_w += per[i].rouge_w;
        add_to_bins(r.by_summary_length, references[i].size(), per[i].sbleu);
        if (!code_lengths.empty()) add_to_bins(r.by_code_length, code_lengths[i], per[i].sbleu);
    }
    const double n = static_cast<double>(per.size());
    r.meteor = 100.0 * r.meteor / n;
    r.rouge_l = 100.0 * r.rouge_l / n;
    r.rouge_w = 100.0 * r.rouge_w / n;
    finish_bins(r.by_summary_length);
    finish_bins(r.by_code_length);
    return r;
}

std::string report_to_json(const EvalReport& report) {
    nlohmann::ordered_json j;
    j["bleu1"] = report.bleu1;
    j["bleu2"] = report.bleu2;
    j["bleu3"] = report.bleu3;
    j["bleu4"] = report.bleu4;
    j["meteor"] = report.meteor;
    j["rouge_l"] = report.rouge_l;
    j["rouge_w"] = report.rouge_w;
    j["n_samples"] = report.n_samples;
    const auto bins = [](const std::vector<LengthBin>& v) {
        nlohmann::ordered_json arr = nlohmann::ordered_json::array();
        for (const auto& b : v)
            arr.push_back({{"bin", b.label}, {"count", b.count}, {"bleu4", b.mean_bleu}});
        return arr;
    };
    j["by_code_length"] = bins(report.by_code_length);
    j["by_summary_length"] = bins(report.by_summary_length);
    return j.dump(2) + "\n";
}

} // namespace editsum::metrics
