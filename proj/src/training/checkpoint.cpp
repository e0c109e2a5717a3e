#include "editsum/error.hpp"
#include "editsum/io.hpp"
#include "editsum/training.hpp"

#include <sstream>

namespace editsum::training {

namespace {

constexpr std::string_view kMagic = "EDSCKP1";

void put_matrix(io::Writer& w, const nn::Matrix<float>& m) {
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.rows()));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(m.cols()));
    w.array(m.data(), m.size());
}

nn::Matrix<float> get_matrix(io::Reader& r, std::size_t rows, std::size_t cols, const std::string& name) {
    const auto rr = r.get<std::uint32_t>(), cc = r.get<std::uint32_t>();
    if (rr != rows || cc != cols)
        throw CorruptFile("checkpoint array " + name + " is " + std::to_string(rr) + "x" + std::to_string(cc) +
                          ", configuration expects " + std::to_string(rows) + "x" + std::to_string(cols));
    nn::Matrix<float> m(rows, cols);
    r.array(m.data(), m.size());
    return m;
}

std::string vocab_text(const corpus::Vocabulary& v) {
    std::ostringstream out;
    v.write(out);
    return out.str();
}

corpus::Vocabulary vocab_from(const std::string& text) {
    std::istringstream in(text);
    return corpus::Vocabulary::read(in);
}

void apply(const config::KeyValues& kv, ModelConfig& model, TrainerConfig& trainer) {
    for (const auto& [k, v] : kv)
        if (!model.set(k, v) && !trainer.set(k, v)) throw CorruptFile("checkpoint config has unknown key " + k);
}

} // namespace

std::string serialize_checkpoint(const Checkpoint& ck) {
    io::Writer body;
    const auto plist = ck.params.all();
    body.put<std::uint32_t>(static_cast<std::uint32_t>(plist.size()));
    for (const auto* p : plist) {
        body.str(p->name);
        put_matrix(body, p->value);
    }
    body.str(vocab_text(ck.code_vocab));
    body.str(vocab_text(ck.summary_vocab));
    body.put<std::uint64_t>(ck.adam_steps);
    body.put<std::uint32_t>(static_cast<std::uint32_t>(ck.adam_m.size()));
    for (std::size_t i = 0; i < ck.adam_m.size(); ++i) {
        put_matrix(body, ck.adam_m[i]);
        put_matrix(body, ck.adam_v[i]);
    }
    body.put<std::uint64_t>(ck.epoch);
    body.put<std::uint64_t>(ck.epochs_run);
    body.put<double>(ck.best_valid_loss);
    body.put<double>(ck.lr);
    body.put<std::uint32_t>(static_cast<std::uint32_t>(ck.history.size()));
    for (const auto& h : ck.history) {
        body.put<std::uint64_t>(h.epoch);
        body.put<double>(h.lr);
        body.put<double>(h.train_loss);
        body.put<double>(h.valid_loss);
        body.put<double>(h.max_grad_norm);
    }

    const std::string cfg = ck.config_text();
    io::Writer out;
    out.bytes(kMagic);
    out.put<std::uint32_t>(kCheckpointVersion);
    out.str(cfg);
    out.bytes(io::sha256_raw(cfg + body.data()));
    out.bytes(body.data());
    return out.take();
}

Checkpoint deserialize_checkpoint(std::string_view data, std::string_view what) {
    io::Reader r(data, std::string(what));
    if (r.remaining() < kMagic.size() || r.bytes(kMagic.size()) != kMagic)
        throw CorruptFile(std::string(what) + ": not a checkpoint (bad magic)");
    const auto version = r.get<std::uint32_t>();
    if (version != kCheckpointVersion)
        throw VersionMismatch(std::string(what) + ": checkpoint version " + std::to_string(version) +
                              ", this build reads version " + std::to_string(kCheckpointVersion));
    const std::string cfg = r.str();
    const std::string digest(r.bytes(32));
    const std::string_view body_bytes = data.substr(data.size() - r.remaining());
    if (io::sha256_raw(cfg + std::string(body_bytes)) != digest)
        throw CorruptFile(std::string(what) + ": checksum mismatch");

    Checkpoint ck;
    apply(config::parse(cfg, what), ck.model, ck.trainer);
    ck.params = ModelParameters<float>(ck.model);
    io::Reader b(body_bytes, std::string(what));
    auto plist = ck.params.all();
    if (b.get<std::uint32_t>() != plist.size()) throw CorruptFile(std::string(what) + ": wrong parameter count");
    for (auto* p : plist) {
        if (b.str() != p->name) throw CorruptFile(std::string(what) + ": parameter order differs at " + p->name);
        p->value = get_matrix(b, p->value.rows(), p->value.cols(), p->name);
    }
    ck.code_vocab = vocab_from(b.str());
    ck.summary_vocab = vocab_from(b.str());
    if (ck.code_vocab.size() != ck.model.code_vocab_size || ck.summary_vocab.size() != ck.model.summary_vocab_size)
        throw CorruptFile(std::string(what) + ": embedded vocabulary sizes disagree with the config");
    ck.adam_steps = b.get<std::uint64_t>();
    const auto n_moments = b.get<std::uint32_t>();
    if (n_moments != 0 && n_moments != plist.size())
        throw CorruptFile(std::string(what) + ": wrong optimizer state count");
    for (std::size_t i = 0; i < n_moments; ++i) {
        ck.adam_m.push_back(get_matrix(b, plist[i]->value.rows(), plist[i]->value.cols(), plist[i]->name));
        ck.adam_v.push_back(get_matrix(b, plist[i]->value.rows(), plist[i]->value.cols(), plist[i]->name));
    }
    ck.epoch = b.get<std::uint64_t>();
    ck.epochs_run = b.get<std::uint64_t>();
    ck.best_valid_loss = b.get<double>();
    ck.lr = b.get<double>();
    const auto n_hist = b.get<std::uint32_t>();
    for (std::uint32_t i = 0; i < n_hist; ++i) {
        EpochRecord h;
        h.epoch = b.get<std::uint64_t>();
        h.lr = b.get<double>();
        h.train_loss = b.get<double>();
        h.valid_loss = b.get<double>();
        h.max_grad_norm = b.get<double>();
        ck.history.push_back(h);
    }
    if (!b.done()) throw CorruptFile(std::string(what) + ": trailing bytes after checkpoint body");
    return ck;
}

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    io::write_file(path, serialize_checkpoint(ckpt));
}

Checkpoint load_checkpoint(const std::filesystem::path& path, const std::optional<ModelConfig>& expected) {
    auto ck = deserialize_checkpoint(io::read_file(path), path.string());
    if (expected && !(*expected == ck.model)) {
        std::string diff;
        const auto want = expected->to_kv(), have = ck.model.to_kv();
        for (const auto& [k, v] : want)
            if (have.at(k) != v) diff += " " + k + " (expected " + v + ", stored " + have.at(k) + ")";
        throw VersionMismatch(path.string() + ": checkpoint configuration differs:" + diff);
    }
    return ck;
}

} // namespace editsum::training
