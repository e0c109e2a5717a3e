#include "editsum/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace editsum::metrics {

namespace {

// Exhaustive alignment search for references up to 64 tokens: candidate
// positions are visited left to right, each either linked to an unused
// reference position holding the same token or skipped when the remaining
// occurrences still reach that token's match quota. The search maximizes the
// number of adjacent link pairs (i -> j, i+1 -> j+1), and chunks equal
// matches minus adjacencies. Highly repetitive pairs can make the state space
// explode, so the search gives up after kStateBudget memo entries.
constexpr std::size_t kStateBudget = std::size_t{1} << 18;

struct BudgetExceeded {};

class ChunkSearch {
  public:
    ChunkSearch(std::span<const Token> cand, std::span<const Token> ref) : cand_(cand), ref_(ref) {
        std::unordered_map<Token, int> ids;
        for (const auto& t : cand) ids.emplace(t, static_cast<int>(ids.size()));
        for (const auto& t : ref) ids.emplace(t, static_cast<int>(ids.size()));
        cand_ids_.reserve(cand.size());
        for (const auto& t : cand) cand_ids_.push_back(ids[t]);
        for (const auto& t : ref) ref_ids_.push_back(ids[t]);
        const std::size_t types = ids.size();
        std::vector<int> cc(types, 0), rc(types, 0);
        for (int t : cand_ids_) ++cc[t];
        for (int t : ref_ids_) ++rc[t];
        quota_.resize(types);
        for (std::size_t t = 0; t < types; ++t) {
            quota_[t] = std::min(cc[t], rc[t]);
            matches_ += static_cast<std::size_t>(quota_[t]);
        }
        // occurrences of cand_ids_[i] at positions > i
        remaining_after_.resize(cand_ids_.size());
        std::vector<int> seen(types, 0);
        for (std::size_t i = cand_ids_.size(); i-- > 0;) {
            remaining_after_[i] = seen[cand_ids_[i]];
            ++seen[cand_ids_[i]];
        }
    }

    [[nodiscard]] std::size_t matches() const { return matches_; }

    std::size_t best_adjacencies() {
        if (matches_ == 0) return 0;
        std::vector<int> used(quota_.size(), 0);
        return static_cast<std::size_t>(search(0, 0, -1, used));
    }

  private:
    int search(std::size_t i, std::uint64_t mask, int prev_ref, std::vector<int>& used) {
        if (i == cand_ids_.size()) return 0;
        const std::uint64_t key = (mask * 131 + i) * 131 + static_cast<std::uint64_t>(prev_ref + 1);
        if (auto it = memo_.find(key); it != memo_.end() && it->second.mask == mask &&
                                        it->second.i == i && it->second.prev == prev_ref)
            return it->second.value;
        const int tok = cand_ids_[i];
        int best = -1;
        if (used[tok] + remaining_after_[i] >= quota_[tok]) best = search(i + 1, mask, -1, used);
        if (used[tok] < quota_[tok]) {
            for (std::size_t j = 0; j < ref_ids_.size(); ++j) {
                if (ref_ids_[j] != tok || (mask >> j) & 1U) continue;
                ++used[tok];
                const int adj = (prev_ref >= 0 && static_cast<std::size_t>(prev_ref) + 1 == j) ? 1 : 0;
                const int sub = search(i + 1, mask | (std::uint64_t{1} << j), static_cast<int>(j), used);
                --used[tok];
                if (sub >= 0) best = std::max(best, sub + adj);
            }
        }
        if (memo_.size() >= kStateBudget) throw BudgetExceeded{};
        memo_[key] = {mask, i, prev_ref, best};
        return best;
    }

    struct Memo {
        std::uint64_t mask;
        std::size_t i;
        int prev;
        int value;
    };

    std::span<const Token> cand_;
    std::span<const Token> ref_;
    std::vector<int> cand_ids_;
    std::vector<int> ref_ids_;
    std::vector<int> quota_;
    std::vector<int> remaining_after_;
    std::size_t matches_ = 0;
    std::unordered_map<std::uint64_t, Memo> memo_;
};

// Left-to-right greedy alignment for very long or highly repetitive pairs.
Alignment greedy_alignment(std::span<const Token> cand, std::span<const Token> ref) {
    std::vector<bool> used(ref.size(), false);
    Alignment a;
    long prev = -2;
    for (const auto& t : cand) {
        long hit = -1;
        if (prev >= -1 && static_cast<std::size_t>(prev + 1) < ref.size() && !used[prev + 1] &&
            ref[prev + 1] == t)
            hit = prev + 1;
        for (std::size_t j = 0; hit < 0 && j < ref.size(); ++j)
            if (!used[j] && ref[j] == t) hit = static_cast<long>(j);
        if (hit < 0) {
            prev = -2;
            continue;
        }
        used[hit] = true;
        ++a.matches;
        if (hit != prev + 1) ++a.chunks;
        prev = hit;
    }
    return a;
}

} // namespace

Alignment meteor_alignment(std::span<const Token> candidate, std::span<const Token> reference) {
    if (reference.size() > 64) return greedy_alignment(candidate, reference);
    ChunkSearch search(candidate, reference);
    Alignment a;
    a.matches = search.matches();
    try {
        a.chunks = a.matches - search.best_adjacencies();
    } catch (const BudgetExceeded&) {
        return greedy_alignment(candidate, reference);
    }
    return a;
}

double meteor(std::span<const Token> candidate, std::span<const Token> reference,
              const MeteorConfig& config) {
    const auto a = meteor_alignment(candidate, reference);
    if (a.matches == 0) return 0.0;
    const double m = static_cast<double>(a.matches);
    const double p = m / static_cast<double>(candidate.size());
    const double r = m / static_cast<double>(reference.size());
    const double fmean = p * r / (config.alpha * p + (1.0 - config.alpha) * r);
    const double frag = static_cast<double>(a.chunks) / m;
    return (1.0 - config.gamma * std::pow(frag, config.beta)) * fmean;
}

std::size_t lcs_length(std::span<const Token> a, std::span<const Token> b) {
    std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j)
            cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

double rouge_l(std::span<const Token> candidate, std::span<const Token> reference) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const double lcs = static_cast<double>(lcs_length(candidate, reference));
    if (lcs == 0.0) return 0.0;
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(reference.size());
    const double beta = p / r;
    const double b2 = beta * beta;
    return (1.0 + b2) * p * r / (r + b2 * p);
}

double wlcs(std::span<const Token> candidate, std::span<const Token> reference,
            double weight_exponent) {
    const std::size_t m = candidate.size(), n = reference.size();
    const auto f = [weight_exponent](double k) { return std::pow(k, weight_exponent); };
    std::vector<double> c((m + 1) * (n + 1), 0.0);
    std::vector<std::size_t> w((m + 1) * (n + 1), 0);
    const auto at = [n](std::size_t i, std::size_t j) { return i * (n + 1) + j; };
    for (std::size_t i = 1; i <= m; ++i)
        for (std::size_t j = 1; j <= n; ++j) {
            if (candidate[i - 1] == reference[j - 1]) {
                const auto k = static_cast<double>(w[at(i - 1, j - 1)]);
                c[at(i, j)] = c[at(i - 1, j - 1)] + f(k + 1) - f(k);
                w[at(i, j)] = w[at(i - 1, j - 1)] + 1;
            } else {
                c[at(i, j)] = std::max(c[at(i - 1, j)], c[at(i, j - 1)]);
            }
        }
    return c[at(m, n)];
}

double rouge_w(std::span<const Token> candidate, std::span<const Token> reference,
               double weight_exponent) {
    if (candidate.empty() || reference.empty()) return 0.0;
    const double score = wlcs(candidate, reference, weight_exponent);
    if (score <= 0.0) return 0.0;
    const auto f = [weight_exponent](double k) { return std::pow(k, weight_exponent); };
    const auto f_inv = [weight_exponent](double x) { return std::pow(x, 1.0 / weight_exponent); };
    const double r = f_inv(score / f(static_cast<double>(reference.size())));
    const double p = f_inv(score / f(static_cast<double>(candidate.size())));
    return 2.0 * p * r / (p + r);
}

} // namespace editsum::metrics
