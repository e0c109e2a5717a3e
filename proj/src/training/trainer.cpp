#include "editsum/error.hpp"
#include "editsum/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace editsum::training {

TrainerConfig TrainerConfig::desk() {
    TrainerConfig c;
    c.batch_size = 32;
    return c;
}

void TrainerConfig::validate() const {
    if (batch_size == 0) throw UsageError("train.batch_size must be at least 1");
    if (eval_batch_size == 0) throw UsageError("train.eval_batch_size must be at least 1");
    if (!(initial_lr > 0.0)) throw UsageError("train.initial_lr must be positive");
    if (!(lr_decay > 0.0 && lr_decay <= 1.0)) throw UsageError("train.lr_decay must lie in (0, 1]");
    if (!(clip_norm > 0.0)) throw UsageError("train.clip_norm must be positive");
    if (max_epochs == 0) throw UsageError("train.max_epochs must be at least 1");
    if (max_code_vocab <= corpus::Vocabulary::kNumSpecials || max_summary_vocab <= corpus::Vocabulary::kNumSpecials)
        throw UsageError("vocabulary limits must leave room beyond the 4 special tokens");
}

config::KeyValues TrainerConfig::to_kv() const {
    return {
        {"train.batch_size", std::to_string(batch_size)},
        {"train.eval_batch_size", std::to_string(eval_batch_size)},
        {"train.initial_lr", config::from_double(initial_lr)},
        {"train.lr_decay", config::from_double(lr_decay)},
        {"train.clip_norm", config::from_double(clip_norm)},
        {"train.max_epochs", std::to_string(max_epochs)},
        {"train.patience", std::to_string(patience)},
        {"train.max_code_vocab", std::to_string(max_code_vocab)},
        {"train.max_summary_vocab", std::to_string(max_summary_vocab)},
        {"train.seed", std::to_string(seed)},
    };
}

bool TrainerConfig::set(std::string_view key, std::string_view value) {
    if (key == "train.batch_size") batch_size = config::to_size(key, value);
    else if (key == "train.eval_batch_size") eval_batch_size = config::to_size(key, value);
    else if (key == "train.initial_lr") initial_lr = config::to_double(key, value);
    else if (key == "train.lr_decay") lr_decay = config::to_double(key, value);
    else if (key == "train.clip_norm") clip_norm = config::to_double(key, value);
    else if (key == "train.max_epochs") max_epochs = config::to_size(key, value);
    else if (key == "train.patience") patience = config::to_size(key, value);
    else if (key == "train.max_code_vocab") max_code_vocab = config::to_size(key, value);
    else if (key == "train.max_summary_vocab") max_summary_vocab = config::to_size(key, value);
    else if (key == "train.seed") seed = config::to_u64(key, value);
    else return false;
    return true;
}

double TrainerConfig::lr_after(std::size_t epochs) const {
    return initial_lr * std::pow(lr_decay, static_cast<double>(epochs));
}

bool EarlyStopping::update(std::size_t epoch, double valid_loss) {
    improved_ = best_epoch_ == 0 || valid_loss < best_;
    if (improved_) {
        best_ = valid_loss;
        best_epoch_ = epoch;
        stale_ = 0;
        return false;
    }
    ++stale_;
    return patience_ > 0 && stale_ >= patience_;
}

std::vector<std::vector<std::size_t>> make_batches(std::span<const EncodedInstance> instances,
                                                   std::size_t batch_size, nn::Rng& rng) {
    if (batch_size == 0) throw UsageError("batch size must be at least 1");
    std::vector<std::size_t> order(instances.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return instances[a].target.size() < instances[b].target.size();
    });
    std::vector<std::vector<std::size_t>> batches;
    for (std::size_t i = 0; i < order.size(); i += batch_size)
        batches.emplace_back(order.begin() + static_cast<std::ptrdiff_t>(i),
                             order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), i + batch_size)));
    std::shuffle(batches.begin(), batches.end(), rng);
    return batches;
}

TrainingData prepare_data(std::span<const TrainingInstance> train, std::span<const TrainingInstance> valid,
                          ModelConfig& model, const TrainerConfig& trainer) {
    if (train.empty()) throw EmptyDataset("no training instances");
    if (valid.empty()) throw EmptyDataset("no validation instances");
    std::vector<corpus::Tokens> code, summary;
    code.reserve(2 * train.size());
    summary.reserve(2 * train.size());
    for (const auto& inst : train) {
        code.push_back(inst.x);
        code.push_back(inst.x_prime);
        summary.push_back(inst.y);
        summary.push_back(inst.y_prime);
    }
    TrainingData d;
    d.code_vocab = corpus::build_vocab(code, trainer.max_code_vocab);
    d.summary_vocab = corpus::build_vocab(summary, trainer.max_summary_vocab);
    model.code_vocab_size = d.code_vocab.size();
    model.summary_vocab_size = d.summary_vocab.size();
    model.validate();
    for (const auto& inst : train) d.train.push_back(model::encode_instance(inst, d.code_vocab, d.summary_vocab, model));
    for (const auto& inst : valid) d.valid.push_back(model::encode_instance(inst, d.code_vocab, d.summary_vocab, model));
    return d;
}

std::string Checkpoint::config_text() const {
    auto kv = model.to_kv();
    kv.merge(trainer.to_kv());
    return config::format(kv);
}

namespace {

// Independent stream per (seed, epoch, purpose).
nn::Rng epoch_rng(std::uint64_t seed, std::size_t epoch, std::uint32_t purpose) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(epoch), purpose};
    return nn::Rng(seq);
}

struct Snapshot {
    ModelParameters<float> params;
    std::uint64_t steps = 0;
    std::vector<nn::Matrix<float>> m, v;
    std::size_t epoch = 0;
    double lr = 0.0;
};

} // namespace

Checkpoint train(const TrainingData& data, const ModelConfig& model, const TrainerConfig& trainer,
                 const EpochCallback& on_epoch) {
    model.validate();
    trainer.validate();
    if (data.train.empty()) throw EmptyDataset("no training instances");
    if (data.valid.empty()) throw EmptyDataset("no validation instances");
    if (model.summary_vocab_size != data.summary_vocab.size() || model.code_vocab_size != data.code_vocab.size())
        throw UsageError("model vocabulary sizes do not match the training vocabularies");

    ModelParameters<float> params(model);
    {
        nn::Rng init(trainer.seed);
        params.initialize(init);
    }
    auto plist = params.all();
    nn::Adam<float> adam(plist, nn::AdamHyper{trainer.initial_lr});
    EarlyStopping stopper(trainer.patience);
    Snapshot best;
    std::vector<EpochRecord> history;

    for (std::size_t epoch = 1; epoch <= trainer.max_epochs; ++epoch) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.lr = trainer.lr_after(epoch - 1);
        adam.set_learning_rate(rec.lr);
        auto shuffle_rng = epoch_rng(trainer.seed, epoch, 1);
        auto dropout_rng = epoch_rng(trainer.seed, epoch, 2);
        const auto batches = make_batches(data.train, trainer.batch_size, shuffle_rng);

        double loss_sum = 0.0;
        std::size_t tokens = 0;
        for (std::size_t bi = 0; bi < batches.size(); ++bi) {
            std::vector<const EncodedInstance*> items;
            for (auto i : batches[bi]) items.push_back(&data.train[i]);
            const auto batch = model::make_batch(items);
            params.zero_grad();
            nn::Tape<float> tape(true);
            model::RunContext ctx{true, &dropout_rng};
            const auto loss = model::forward_loss(model::bind(tape, params, model), model, batch, ctx);
            const double lv = loss.value()[0];
            const auto fail = [&](double norm) {
                std::ostringstream msg;
                msg << "non-finite training loss or gradient at epoch " << epoch << ", batch " << bi + 1
                    << " of " << batches.size() << ": loss " << lv << ", grad norm " << norm;
                throw NonFiniteLoss(msg.str());
            };
            if (!std::isfinite(lv)) fail(std::nan(""));
            tape.backward(loss);
            const double norm = nn::clip_grad_norm<float>(plist, trainer.clip_norm);
            if (!std::isfinite(norm)) fail(norm);
            rec.max_grad_norm = std::max(rec.max_grad_norm, norm);
            adam.step(plist);
            std::size_t n = 0;
            for (auto m : batch.target_mask) n += m;
            loss_sum += lv * static_cast<double>(n);
            tokens += n;
        }
        rec.train_loss = loss_sum / static_cast<double>(tokens);
        rec.valid_loss = model::evaluate_loss(params, model, data.valid, trainer.eval_batch_size);
        if (!std::isfinite(rec.valid_loss))
            throw NonFiniteLoss("non-finite validation loss after epoch " + std::to_string(epoch));
        history.push_back(rec);
        if (on_epoch) on_epoch(rec);

        const bool stop = stopper.update(epoch, rec.valid_loss);
        if (stopper.improved()) {
            best.params = params;
            best.steps = adam.steps();
            best.m = adam.first_moments();
            best.v = adam.second_moments();
            best.epoch = epoch;
            best.lr = trainer.lr_after(epoch);
        }
        if (stop) break;
    }

    Checkpoint ck;
    ck.model = model;
    ck.trainer = trainer;
    ck.code_vocab = data.code_vocab;
    ck.summary_vocab = data.summary_vocab;
    ck.params = std::move(best.params);
    ck.adam_steps = best.steps;
    ck.adam_m = std::move(best.m);
    ck.adam_v = std::move(best.v);
    ck.epoch = best.epoch;
    ck.epochs_run = history.size();
    ck.best_valid_loss = stopper.best();
    ck.lr = best.lr;
    ck.history = std::move(history);
    return ck;
}

double validation_loss(const Checkpoint& ckpt, std::span<const EncodedInstance> valid, bool f64) {
    if (f64) {
        auto p = ckpt.params.cast<double>();
        return model::evaluate_loss(p, ckpt.model, valid, ckpt.trainer.eval_batch_size);
    }
    auto p = ckpt.params;
    return model::evaluate_loss(p, ckpt.model, valid, ckpt.trainer.eval_batch_size);
}

} // namespace editsum::training
