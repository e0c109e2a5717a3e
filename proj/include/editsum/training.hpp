#pragma once

#include "editsum/config.hpp"
#include "editsum/model.hpp"

#include <filesystem>
#include <functional>
#include <optional>

namespace editsum::training {

using model::EncodedInstance;
using model::ModelConfig;
using model::ModelParameters;
using retrieval::TrainingInstance;

struct TrainerConfig {
    std::size_t batch_size = 512;
    std::size_t eval_batch_size = 64;
    double initial_lr = 1e-3;
    double lr_decay = 0.95; // per epoch
    double clip_norm = 5.0;
    std::size_t max_epochs = 30;
    std::size_t patience = 5; // 0 disables early stopping
    std::size_t max_code_vocab = corpus::kDefaultVocabSize;
    std::size_t max_summary_vocab = corpus::kDefaultVocabSize;
    std::uint64_t seed = 1;

    // batch 32
    static TrainerConfig desk();

    void validate() const;
    [[nodiscard]] config::KeyValues to_kv() const; // "train.*"
    bool set(std::string_view key, std::string_view value);

    // Learning rate after `epochs` completed epochs.
    [[nodiscard]] double lr_after(std::size_t epochs) const;

    friend bool operator==(const TrainerConfig&, const TrainerConfig&) = default;
};

/// Tracks the best validation loss; `update` returns true when training
/// should stop after this epoch.
class EarlyStopping {
  public:
    explicit EarlyStopping(std::size_t patience) : patience_(patience) {}

    bool update(std::size_t epoch, double valid_loss);
    [[nodiscard]] bool improved() const { return improved_; }
    [[nodiscard]] std::size_t best_epoch() const { return best_epoch_; }
    [[nodiscard]] double best() const { return best_; }

  private:
    std::size_t patience_;
    std::size_t best_epoch_ = 0;
    double best_ = 0.0;
    std::size_t stale_ = 0;
    bool improved_ = false;
};

/// Shuffles with `rng`, stable-sorts by target length, cuts into batches and
/// shuffles the batch order. Returns indices into `instances`.
std::vector<std::vector<std::size_t>> make_batches(std::span<const EncodedInstance> instances,
                                                   std::size_t batch_size, nn::Rng& rng);

struct TrainingData {
    corpus::Vocabulary code_vocab;
    corpus::Vocabulary summary_vocab;
    std::vector<EncodedInstance> train;
    std::vector<EncodedInstance> valid;
};

/// Builds both vocabularies from the training instances (code: X and X',
/// summaries: Y and Y') and encodes both sets. Sets the vocabulary sizes in
/// `model`. Throws EmptyDataset when either set is empty.
TrainingData prepare_data(std::span<const TrainingInstance> train, std::span<const TrainingInstance> valid,
                          ModelConfig& model, const TrainerConfig& trainer);

struct EpochRecord {
    std::size_t epoch = 0;
    double lr = 0.0;
    double train_loss = 0.0; // token mean, dropout on
    double valid_loss = 0.0; // token mean, dropout off
    double max_grad_norm = 0.0; // before clipping

    friend bool operator==(const EpochRecord&, const EpochRecord&) = default;
};

struct Checkpoint {
    ModelConfig model;
    TrainerConfig trainer;
    corpus::Vocabulary code_vocab;
    corpus::Vocabulary summary_vocab;
    ModelParameters<float> params;
    std::uint64_t adam_steps = 0;
    std::vector<nn::Matrix<float>> adam_m;
    std::vector<nn::Matrix<float>> adam_v;
    std::size_t epoch = 0;      // epoch the parameters come from
    std::size_t epochs_run = 0; // including epochs after the best one
    double best_valid_loss = 0.0;
    double lr = 0.0; // learning rate for the next epoch
    std::vector<EpochRecord> history;

    // The canonical text stored in the file header.
    [[nodiscard]] std::string config_text() const;
};

using EpochCallback = std::function<void(const EpochRecord&)>;

/// Adam with per-epoch decay, global-norm clipping and early stopping on the
/// validation loss. Returns the best-validation checkpoint. Throws
/// NonFiniteLoss naming epoch, batch and gradient norm.
Checkpoint train(const TrainingData& data, const ModelConfig& model, const TrainerConfig& trainer,
                 const EpochCallback& on_epoch = {});

/// Validation loss of a checkpoint. `f64` evaluates in double precision.
double validation_loss(const Checkpoint& ckpt, std::span<const EncodedInstance> valid, bool f64);

// Checkpoint file: "EDSCKP1", u32 version, config text, SHA-256 of config
// text and body, then the body (parameters as little-endian f32 in
// declaration order, vocabularies, optimizer state, progress).
inline constexpr std::uint32_t kCheckpointVersion = 1;

std::string serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::string_view data, std::string_view what = "checkpoint");
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
/// Throws VersionMismatch when `expected` is given and its configuration
/// (vocabulary sizes included) differs from the stored one.
Checkpoint load_checkpoint(const std::filesystem::path& path,
                           const std::optional<ModelConfig>& expected = std::nullopt);

} // namespace editsum::training
