#include "editsum/cli.hpp"
#include "editsum/config.hpp"
#include "editsum/error.hpp"
#include "editsum/inference.hpp"
#include "editsum/io.hpp"
#include "editsum/metrics.hpp"
#include "editsum/retrieval.hpp"
#include "editsum/synth.hpp"
#include "editsum/training.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <sstream>

namespace editsum::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Inputs and outputs are recorded by role, not by path, so two runs in
// different directories produce the same manifest.
class Manifest {
  public:
    explicit Manifest(std::string command) : command_(std::move(command)) {}

    void setting(const std::string& key, const std::string& value) { settings_[key] = value; }
    void settings(const config::KeyValues& kv) {
        for (const auto& [k, v] : kv) settings_[k] = v;
    }
    void seed(std::uint64_t s) { seed_ = s; }
    void input(const std::string& role, const fs::path& p) { inputs_.emplace_back(role, p); }
    void output(const std::string& role, const fs::path& p) { outputs_.emplace_back(role, p); }

    void write(const fs::path& path) const {
        ordered_json j;
        j["command"] = command_;
        j["config_sha256"] = io::sha256_hex(config::format(settings_));
        j["seed"] = seed_ ? ordered_json(*seed_) : ordered_json(nullptr);
        ordered_json cfg = ordered_json::object();
        for (const auto& [k, v] : settings_) cfg[k] = v;
        j["config"] = cfg;
        const auto files = [](const auto& list) {
            ordered_json o = ordered_json::object();
            for (const auto& [role, p] : list) o[role] = io::sha256_file(p);
            return o;
        };
        j["inputs"] = files(inputs_);
        j["outputs"] = files(outputs_);
        io::write_file(path, j.dump(2) + "\n");
    }

  private:
    std::string command_;
    config::KeyValues settings_;
    std::optional<std::uint64_t> seed_;
    std::vector<std::pair<std::string, fs::path>> inputs_;
    std::vector<std::pair<std::string, fs::path>> outputs_;
};

fs::path manifest_for(const fs::path& out_file) { return fs::path(out_file.string() + ".manifest.json"); }

std::string fmt(double v) { return config::from_double(v); }

corpus::DatasetSplit load(const fs::path& path, corpus::SplitName name = corpus::SplitName::train) {
    return corpus::load_split(path, name);
}

// Index built over a different corpus would hand out ids the corpus lacks.
void check_index_matches(const retrieval::InvertedIndex& index, const corpus::DatasetSplit& corpus) {
    if (index.n_docs() != corpus.pairs.size())
        throw DataError("index holds " + std::to_string(index.n_docs()) + " documents but the corpus has " +
                        std::to_string(corpus.pairs.size()) + " pairs");
    for (std::size_t d = 0; d < index.n_docs(); ++d)
        if (corpus.find(index.doc_id(d)) == corpus::DatasetSplit::npos)
            throw DataError("index document '" + index.doc_id(d) + "' is not in the corpus");
}

void require_field(const retrieval::InvertedIndex& index, retrieval::Field want, std::string_view what) {
    if (index.field() != want)
        throw UsageError(std::string(what) + " needs an index over the " + std::string(retrieval::field_name(want)) +
                         " field, got " + std::string(retrieval::field_name(index.field())));
}

struct GeneratedRecord {
    std::string id;
    corpus::Tokens tokens;
};

// Lines of a generate/retrieve output; falls back to `summary` when the
// record has no `generated` field.
std::vector<GeneratedRecord> read_generated(const fs::path& path) {
    std::istringstream in(io::read_file(path));
    std::vector<GeneratedRecord> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        ordered_json j;
        try {
            j = ordered_json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
        const char* key = j.contains("generated") ? "generated" : "summary";
        if (!j.contains(key) || !j[key].is_string())
            throw DataError(path.string() + ":" + std::to_string(lineno) + ": missing string field 'generated'");
        GeneratedRecord r;
        if (j.contains("id") && j["id"].is_string()) r.id = j["id"].get<std::string>();
        r.tokens = corpus::tokenize_summary(j[key].get<std::string>(), static_cast<std::size_t>(-1));
        out.push_back(std::move(r));
    }
    return out;
}

void check_counts(std::size_t generated, std::size_t references) {
    if (generated != references)
        throw LengthMismatch("generated file has " + std::to_string(generated) + " records, references have " +
                             std::to_string(references));
}

std::string output_line(const corpus::RawPair& raw, const corpus::Tokens& generated, const std::string& proto_id) {
    ordered_json j;
    j["id"] = raw.id;
    j["code"] = raw.code;
    j["summary"] = raw.summary;
    j["generated"] = corpus::join(generated);
    if (!proto_id.empty()) j["proto_id"] = proto_id;
    return j.dump() + "\n";
}

// ---- subcommands -----------------------------------------------------------

struct SynthArgs {
    synth::SynthConfig cfg;
    std::string out_dir;
};

int cmd_synth(const SynthArgs& a, std::ostream& out) {
    const auto c = synth::generate(a.cfg);
    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    corpus::write_corpus(dir / "train.jsonl", c.train);
    corpus::write_corpus(dir / "valid.jsonl", c.valid);
    corpus::write_corpus(dir / "test.jsonl", c.test);
    std::string rare;
    for (const auto& w : c.rare) rare += w + "\n";
    io::write_file(dir / "rare.txt", rare);

    Manifest m("synth");
    m.setting("synth.train_pairs", std::to_string(a.cfg.train_pairs));
    m.setting("synth.valid_pairs", std::to_string(a.cfg.valid_pairs));
    m.setting("synth.test_pairs", std::to_string(a.cfg.test_pairs));
    m.setting("synth.rare_fillers", std::to_string(a.cfg.rare_fillers));
    m.setting("synth.rare_min", std::to_string(a.cfg.rare_min));
    m.setting("synth.rare_max", std::to_string(a.cfg.rare_max));
    m.setting("synth.rare_test_share", fmt(a.cfg.rare_test_share));
    m.seed(a.cfg.seed);
    for (const char* f : {"train.jsonl", "valid.jsonl", "test.jsonl", "rare.txt"}) m.output(f, dir / f);
    m.write(dir / "manifest.json");
    out << "wrote " << c.train.size() << " train, " << c.valid.size() << " valid, " << c.test.size()
        << " test pairs to " << dir.string() << "\n";
    return kExitOk;
}

struct IndexArgs {
    std::string corpus, field = "code", out;
    double k1 = retrieval::InvertedIndex::kDefaultK1;
    double b = retrieval::InvertedIndex::kDefaultB;
};

int cmd_build_index(const IndexArgs& a, std::ostream& out) {
    const auto field = retrieval::parse_field(a.field);
    const auto split = load(a.corpus);
    const auto index = retrieval::build_index(split.pairs, field, a.k1, a.b);
    index.save(a.out);
    Manifest m("build-index");
    m.setting("index.field", a.field);
    m.setting("index.k1", fmt(a.k1));
    m.setting("index.b", fmt(a.b));
    m.input("corpus", a.corpus);
    m.output("index", a.out);
    m.write(manifest_for(a.out));
    out << "indexed " << index.n_docs() << " documents, " << index.n_terms() << " terms\n";
    return kExitOk;
}

struct PairsArgs {
    std::string corpus, index, queries, out, mode = "summary";
    retrieval::PairConfig pc;
};

int cmd_make_pairs(const PairsArgs& a, std::ostream& out) {
    const auto train = load(a.corpus);
    const auto index = retrieval::InvertedIndex::load(a.index);
    check_index_matches(index, train);
    Manifest m("make-pairs");
    m.setting("pairs.mode", a.mode);
    m.input("corpus", a.corpus);
    m.input("index", a.index);
    std::vector<retrieval::TrainingInstance> inst;
    if (a.mode == "summary") {
        if (!a.queries.empty()) throw UsageError("--queries only applies to --mode code");
        require_field(index, retrieval::Field::summary, "make-pairs --mode summary");
        m.setting("pairs.top_k", std::to_string(a.pc.top_k));
        m.setting("pairs.jmin", fmt(a.pc.j_min));
        m.setting("pairs.jmax", fmt(a.pc.j_max));
        inst = retrieval::build_training_instances(train, index, a.pc);
    } else if (a.mode == "code") {
        require_field(index, retrieval::Field::code, "make-pairs --mode code");
        if (a.queries.empty()) {
            inst = retrieval::build_code_instances(train, train, index, true);
        } else {
            const auto queries = load(a.queries, corpus::SplitName::valid);
            m.input("queries", a.queries);
            inst = retrieval::build_code_instances(queries, train, index, false);
        }
    } else {
        throw UsageError("--mode must be summary or code, got '" + a.mode + "'");
    }
    retrieval::write_instances(a.out, inst);
    m.output("pairs", a.out);
    m.write(manifest_for(a.out));
    out << "wrote " << inst.size() << " instances\n";
    return kExitOk;
}

struct TrainArgs {
    std::string pairs, valid, config, out_dir, preset = "paper";
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
};

std::string history_tsv(const std::vector<training::EpochRecord>& history) {
    std::string s = "epoch\tlr\ttrain_loss\tvalid_loss\tmax_grad_norm\n";
    char buf[256];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.17g\t%.17g\t%.17g\n", r.epoch, r.lr, r.train_loss,
                      r.valid_loss, r.max_grad_norm);
        s += buf;
    }
    return s;
}

int cmd_train(const TrainArgs& a, std::ostream& out) {
    model::ModelConfig mc;
    training::TrainerConfig tc;
    if (a.preset == "desk") {
        mc = model::ModelConfig::desk();
        tc = training::TrainerConfig::desk();
    } else if (a.preset != "paper") {
        throw UsageError("--preset must be paper or desk, got '" + a.preset + "'");
    }
    const auto apply = [&](const std::string& key, const std::string& value, const std::string& source) {
        if (key == "model.summary_vocab_size" || key == "model.code_vocab_size")
            throw UsageError(source + ": " + key + " is derived from the training data");
        if (!mc.set(key, value) && !tc.set(key, value)) throw UsageError(source + ": unknown key '" + key + "'");
    };
    if (!a.config.empty())
        for (const auto& [k, v] : config::parse(io::read_file(a.config), a.config)) apply(k, v, a.config);
    for (const auto& o : a.overrides) {
        const auto eq = o.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + o + "'");
        apply(o.substr(0, eq), o.substr(eq + 1), "--set");
    }
    if (a.seed) tc.seed = *a.seed;
    tc.validate();

    const auto train_inst = retrieval::read_instances(a.pairs);
    const auto valid_inst = retrieval::read_instances(a.valid);
    const auto data = training::prepare_data(train_inst, valid_inst, mc, tc);
    mc.validate();

    const fs::path dir = a.out_dir;
    fs::create_directories(dir);
    config::KeyValues effective = mc.to_kv();
    for (const auto& [k, v] : tc.to_kv()) effective[k] = v;
    io::write_file(dir / "config.txt", config::format(effective));
    out << "train " << data.train.size() << " instances, valid " << data.valid.size() << ", vocab code "
        << data.code_vocab.size() << " summary " << data.summary_vocab.size() << "\n";

    const auto ck = training::train(data, mc, tc, [&](const training::EpochRecord& r) {
        out << "epoch " << r.epoch << " lr " << r.lr << " train " << r.train_loss << " valid " << r.valid_loss
            << " grad " << r.max_grad_norm << std::endl;
    });
    training::save_checkpoint(ck, dir / "checkpoint.bin");
    io::write_file(dir / "loss_log.tsv", history_tsv(ck.history));

    Manifest m("train");
    m.settings(effective);
    m.seed(tc.seed);
    m.input("pairs", a.pairs);
    m.input("valid", a.valid);
    if (!a.config.empty()) m.input("config", a.config);
    m.output("checkpoint.bin", dir / "checkpoint.bin");
    m.output("config.txt", dir / "config.txt");
    m.output("loss_log.tsv", dir / "loss_log.tsv");
    m.write(dir / "manifest.json");
    out << "best epoch " << ck.epoch << " of " << ck.epochs_run << ", valid loss " << ck.best_valid_loss << "\n";
    return kExitOk;
}

struct GenerateArgs {
    std::string checkpoint, index, corpus, input, out;
    std::size_t beam = 10, max_len = corpus::kDefaultMaxSummaryLen;
    bool exclude_self = false;
};

int cmd_generate(const GenerateArgs& a, std::ostream& out) {
    const auto ck = training::load_checkpoint(a.checkpoint);
    const auto train = load(a.corpus);
    const auto index = retrieval::InvertedIndex::load(a.index);
    require_field(index, retrieval::Field::code, "generate");
    check_index_matches(index, train);
    const auto raw = corpus::read_corpus(a.input);
    const auto queries = corpus::make_split(corpus::SplitName::test, raw, ck.model.max_code_len);

    inference::BeamConfig bc;
    bc.beam_size = a.beam;
    bc.max_len = a.max_len;
    if (a.beam == 0 || a.max_len == 0) throw UsageError("--beam and --max-len must be positive");
    const inference::Generator gen(ck, index, train);
    const auto results = gen.generate_all(queries, bc, a.exclude_self);

    std::string text;
    for (std::size_t i = 0; i < raw.size(); ++i) text += output_line(raw[i], results[i].summary, results[i].proto_id);
    io::write_file(a.out, text);

    Manifest m("generate");
    m.setting("generate.beam", std::to_string(a.beam));
    m.setting("generate.max_len", std::to_string(a.max_len));
    m.setting("generate.exclude_self", a.exclude_self ? "true" : "false");
    m.input("checkpoint", a.checkpoint);
    m.input("index", a.index);
    m.input("corpus", a.corpus);
    m.input("input", a.input);
    m.output("generated", a.out);
    m.write(manifest_for(a.out));
    out << "generated " << results.size() << " summaries\n";
    return kExitOk;
}

struct RetrieveArgs {
    std::string method = "bm25", corpus, input, index, out;
    std::size_t k = 5;
    bool exclude_self = false;
};

int cmd_retrieve(const RetrieveArgs& a, std::ostream& out) {
    const auto train = load(a.corpus);
    const auto raw = corpus::read_corpus(a.input);
    const auto queries = corpus::make_split(corpus::SplitName::test, raw);
    Manifest m("retrieve");
    m.setting("retrieve.method", a.method);
    m.input("corpus", a.corpus);
    m.input("input", a.input);

    std::vector<corpus::Tokens> summaries(raw.size());
    std::vector<std::string> protos(raw.size());
    if (a.method == "bm25") {
        m.setting("retrieve.exclude_self", a.exclude_self ? "true" : "false");
        std::optional<retrieval::InvertedIndex> index;
        if (a.index.empty()) {
            index = retrieval::build_index(train.pairs, retrieval::Field::code);
        } else {
            index = retrieval::InvertedIndex::load(a.index);
            require_field(*index, retrieval::Field::code, "retrieve --method bm25");
            check_index_matches(*index, train);
            m.input("index", a.index);
        }
        for (std::size_t i = 0; i < raw.size(); ++i) {
            const auto& q = queries.pairs[i];
            auto p = retrieval::retrieve_prototype(*index, train, q.code_tokens,
                                                   a.exclude_self ? std::optional<std::string_view>(q.id)
                                                                  : std::nullopt);
            summaries[i] = std::move(p.summary);
            protos[i] = std::move(p.id);
        }
    } else if (a.method == "vsm" || a.method == "nngen") {
        if (a.exclude_self) throw UsageError("--exclude-self only applies to --method bm25");
        const retrieval::VsmModel vsm(train);
        if (a.method == "nngen") m.setting("retrieve.k", std::to_string(a.k));
        for (std::size_t i = 0; i < raw.size(); ++i)
            summaries[i] = a.method == "vsm" ? retrieval::vsm_retrieve(vsm, queries.pairs[i].code_tokens)
                                             : retrieval::nngen_select(vsm, queries.pairs[i].code_tokens, a.k);
    } else {
        throw UsageError("--method must be bm25, vsm or nngen, got '" + a.method + "'");
    }
    std::string text;
    for (std::size_t i = 0; i < raw.size(); ++i) text += output_line(raw[i], summaries[i], protos[i]);
    io::write_file(a.out, text);
    m.output("retrieved", a.out);
    m.write(manifest_for(a.out));
    out << "retrieved " << raw.size() << " summaries\n";
    return kExitOk;
}

struct EvalArgs {
    std::string generated, references, out;
};

int cmd_evaluate(const EvalArgs& a, std::ostream& out) {
    const auto gen = read_generated(a.generated);
    const auto refs = load(a.references, corpus::SplitName::test);
    check_counts(gen.size(), refs.pairs.size());
    std::vector<corpus::Tokens> cands, ref_tokens;
    std::vector<std::size_t> code_len;
    for (std::size_t i = 0; i < gen.size(); ++i) {
        if (!gen[i].id.empty() && gen[i].id != refs.pairs[i].id)
            throw DataError("record " + std::to_string(i + 1) + ": generated id '" + gen[i].id +
                            "' does not match reference id '" + refs.pairs[i].id + "'");
        cands.push_back(gen[i].tokens);
        ref_tokens.push_back(refs.pairs[i].summary_tokens);
        code_len.push_back(refs.pairs[i].code_tokens.size());
    }
    const auto report = metrics::evaluate(cands, ref_tokens, code_len);
    io::write_file(a.out, metrics::report_to_json(report));
    Manifest m("evaluate");
    m.input("generated", a.generated);
    m.input("references", a.references);
    m.output("report", a.out);
    m.write(manifest_for(a.out));
    out << "BLEU1 " << report.bleu1 << " BLEU2 " << report.bleu2 << " BLEU3 " << report.bleu3 << " BLEU4 "
        << report.bleu4 << " METEOR " << report.meteor << " ROUGE-L " << report.rouge_l << " ROUGE-W "
        << report.rouge_w << " (n=" << report.n_samples << ")\n";
    return kExitOk;
}

struct KeywordArgs {
    std::string generated, references, train_corpus, out;
};

int cmd_analyze_keywords(const KeywordArgs& a, std::ostream& out) {
    const auto gen = read_generated(a.generated);
    const auto refs = load(a.references, corpus::SplitName::test);
    const auto train = load(a.train_corpus);
    check_counts(gen.size(), refs.pairs.size());
    std::vector<corpus::Tokens> cands, ref_tokens, train_summaries;
    for (std::size_t i = 0; i < gen.size(); ++i) {
        cands.push_back(gen[i].tokens);
        ref_tokens.push_back(refs.pairs[i].summary_tokens);
    }
    for (const auto& p : train.pairs) train_summaries.push_back(p.summary_tokens);
    const auto freq = metrics::token_frequencies(train_summaries);
    const auto report = metrics::keyword_bucket_analysis(cands, ref_tokens, freq);
    ordered_json j = ordered_json::object();
    for (const auto& [threshold, count] : report.buckets) j["<" + std::to_string(threshold)] = count;
    if (!a.out.empty()) {
        io::write_file(a.out, j.dump(2) + "\n");
        Manifest m("analyze-keywords");
        m.input("generated", a.generated);
        m.input("references", a.references);
        m.input("train_corpus", a.train_corpus);
        m.output("report", a.out);
        m.write(manifest_for(a.out));
    }
    for (const auto& [threshold, count] : report.buckets) out << "freq<" << threshold << " " << count << "\n";
    return kExitOk;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Retrieve-and-edit code summarization", "editsum"};
    app.require_subcommand(1);
    app.set_help_all_flag("--help-all", "Help for every subcommand");

    std::function<int()> action;

    SynthArgs synth_a;
    auto* sy = app.add_subcommand("synth", "Write the synthetic template corpus");
    sy->add_option("--out-dir", synth_a.out_dir, "Output directory")->required();
    sy->add_option("--train-pairs", synth_a.cfg.train_pairs)->capture_default_str();
    sy->add_option("--valid-pairs", synth_a.cfg.valid_pairs)->capture_default_str();
    sy->add_option("--test-pairs", synth_a.cfg.test_pairs)->capture_default_str();
    sy->add_option("--rare-fillers", synth_a.cfg.rare_fillers)->capture_default_str();
    sy->add_option("--seed", synth_a.cfg.seed)->capture_default_str();
    sy->callback([&] { action = [&] { return cmd_synth(synth_a, out); }; });

    IndexArgs index_a;
    auto* bi = app.add_subcommand("build-index", "Build a BM25 index over one field of a corpus");
    bi->add_option("--corpus", index_a.corpus, "Corpus JSONL")->required();
    bi->add_option("--field", index_a.field, "code or summary")->capture_default_str();
    bi->add_option("--out", index_a.out, "Index file")->required();
    bi->add_option("--k1", index_a.k1)->capture_default_str();
    bi->add_option("--b", index_a.b)->capture_default_str();
    bi->callback([&] { action = [&] { return cmd_build_index(index_a, out); }; });

    PairsArgs pairs_a;
    auto* mp = app.add_subcommand("make-pairs", "Build (x, y, x', y') training instances");
    mp->add_option("--corpus", pairs_a.corpus, "Training corpus JSONL")->required();
    mp->add_option("--index", pairs_a.index, "Index over the training corpus")->required();
    mp->add_option("--mode", pairs_a.mode, "summary (Jaccard-filtered) or code (top-1 code hit)")
        ->capture_default_str();
    mp->add_option("--queries", pairs_a.queries, "Code mode: build instances for these pairs instead");
    mp->add_option("--top-k", pairs_a.pc.top_k)->capture_default_str();
    mp->add_option("--jmin", pairs_a.pc.j_min)->capture_default_str();
    mp->add_option("--jmax", pairs_a.pc.j_max)->capture_default_str();
    mp->add_option("--out", pairs_a.out, "Instances JSONL")->required();
    mp->callback([&] { action = [&] { return cmd_make_pairs(pairs_a, out); }; });

    TrainArgs train_a;
    auto* tr = app.add_subcommand("train", "Train the edit model");
    tr->add_option("--pairs", train_a.pairs, "Training instances")->required();
    tr->add_option("--valid", train_a.valid, "Validation instances")->required();
    tr->add_option("--config", train_a.config, "Flat key = value config file");
    tr->add_option("--preset", train_a.preset, "paper or desk defaults")->capture_default_str();
    tr->add_option("--set", train_a.overrides, "key=value override (repeatable)");
    tr->add_option("--seed", train_a.seed, "Overrides train.seed");
    tr->add_option("--out-dir", train_a.out_dir, "Output directory")->required();
    tr->callback([&] { action = [&] { return cmd_train(train_a, out); }; });

    GenerateArgs gen_a;
    auto* ge = app.add_subcommand("generate", "Generate summaries with a trained checkpoint");
    ge->add_option("--checkpoint", gen_a.checkpoint)->required();
    ge->add_option("--index", gen_a.index, "Code index over the training corpus")->required();
    ge->add_option("--corpus", gen_a.corpus, "Training corpus JSONL")->required();
    ge->add_option("--input", gen_a.input, "Corpus JSONL to summarize")->required();
    ge->add_option("--beam", gen_a.beam)->capture_default_str();
    ge->add_option("--max-len", gen_a.max_len)->capture_default_str();
    ge->add_flag("--exclude-self", gen_a.exclude_self, "Never retrieve a pair with the input's own id");
    ge->add_option("--out", gen_a.out, "Output JSONL")->required();
    ge->callback([&] { action = [&] { return cmd_generate(gen_a, out); }; });

    RetrieveArgs ret_a;
    auto* re = app.add_subcommand("retrieve", "Retrieval baselines");
    re->add_option("--method", ret_a.method, "bm25, vsm or nngen")->capture_default_str();
    re->add_option("--corpus", ret_a.corpus, "Training corpus JSONL")->required();
    re->add_option("--input", ret_a.input, "Corpus JSONL to summarize")->required();
    re->add_option("--index", ret_a.index, "bm25: prebuilt code index");
    re->add_option("--k", ret_a.k, "nngen: neighbours considered")->capture_default_str();
    re->add_flag("--exclude-self", ret_a.exclude_self, "bm25: skip the input's own id");
    re->add_option("--out", ret_a.out, "Output JSONL")->required();
    re->callback([&] { action = [&] { return cmd_retrieve(ret_a, out); }; });

    EvalArgs eval_a;
    auto* ev = app.add_subcommand("evaluate", "BLEU, METEOR and ROUGE report");
    ev->add_option("--generated", eval_a.generated)->required();
    ev->add_option("--references", eval_a.references)->required();
    ev->add_option("--out", eval_a.out, "Report JSON")->required();
    ev->callback([&] { action = [&] { return cmd_evaluate(eval_a, out); }; });

    KeywordArgs kw_a;
    auto* kw = app.add_subcommand("analyze-keywords", "Correctly generated low-frequency words");
    kw->add_option("--generated", kw_a.generated)->required();
    kw->add_option("--references", kw_a.references)->required();
    kw->add_option("--train-corpus", kw_a.train_corpus)->required();
    kw->add_option("--out", kw_a.out, "Report JSON");
    kw->callback([&] { action = [&] { return cmd_analyze_keywords(kw_a, out); }; });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        return action();
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const DataError& e) {
        err << "data error: " << e.what() << "\n";
        return kExitData;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitData;
    }
}

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    return run(args, std::cout, std::cerr);
}

} // namespace editsum::cli
