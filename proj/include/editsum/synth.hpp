#pragma once

// Synthetic template corpus: summaries follow a handful of fixed patterns
// ("write X to Y", "convert X to Y", "returns the X", ...) and the code of each
// pattern carries its own body tokens, with the noun filler appearing once in
// the method name. Test and validation pairs only use (pattern, filler)
// combinations that never occur in training, and a block of "rare" fillers
// occurs only a few times in training.

#include "editsum/corpus.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace editsum::synth {

struct SynthConfig {
    std::size_t train_pairs = 1600;
    std::size_t valid_pairs = 200;
    std::size_t test_pairs = 200;
    std::size_t rare_fillers = 40;
    std::size_t rare_min = 3; // training occurrences of each rare filler
    std::size_t rare_max = 8;
    double rare_test_share = 0.5; // fraction of valid/test pairs using a rare filler
    std::uint64_t seed = 1;
};

struct SynthCorpus {
    std::vector<corpus::RawPair> train;
    std::vector<corpus::RawPair> valid;
    std::vector<corpus::RawPair> test;
    std::vector<std::string> rare; // rare filler words, sorted
};

std::size_t template_count();
std::size_t filler_count();

/// Throws UsageError when the configuration cannot be satisfied (for example
/// more rare fillers than the noun list holds, or too few unseen combinations
/// left for the held-out splits).
SynthCorpus generate(const SynthConfig& cfg);

} // namespace editsum::synth
