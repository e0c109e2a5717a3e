#include "editsum/synth.hpp"
#include "editsum/error.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <set>
#include <tuple>

namespace editsum::synth {

namespace {

struct Template {
    const char* summary;
    const char* code;
    std::vector<std::string> b;
};

// {A}/{B} take the filler in lowercase (summaries), {a}/{b} capitalized (code).
const std::vector<Template>& templates() {
    static const std::vector<Template> t = {
        {"write {A} to {B}",
         "public void write{a}To{b}(Object value) throws IOException {\n"
         "    OutputStream out = open{b}Output();\n"
         "    out.write(serialize(value));\n"
         "    out.flush();\n"
         "}",
         {"file", "stream", "socket", "buffer", "disk"}},
        {"convert {A} to {B}",
         "public static Object convert{a}To{b}(Object source) {\n"
         "    Converter converter = Converters.lookup(source);\n"
         "    return converter.transform(source);\n"
         "}",
         {"json", "xml", "string", "array", "bytes"}},
        {"returns the {A}",
         "public Object get{a}() {\n"
         "    synchronized (lock) {\n"
         "        return this.current;\n"
         "    }\n"
         "}",
         {}},
        {"sets the {A}",
         "public void set{a}(Object newValue) {\n"
         "    this.current = newValue;\n"
         "    markDirty();\n"
         "}",
         {}},
        {"creates a new {A}",
         "public static Object create{a}() {\n"
         "    Factory factory = Factory.getInstance();\n"
         "    return factory.newInstance();\n"
         "}",
         {}},
        {"checks whether {A} is {B}",
         "public boolean is{a}{b}(Object target) {\n"
         "    if (target == null) {\n"
         "        return false;\n"
         "    }\n"
         "    return check{b}(target);\n"
         "}",
         {"empty", "valid", "enabled", "visible", "closed"}},
        {"load {A} from {B}",
         "public Object load{a}From{b}(String location) throws IOException {\n"
         "    InputStream in = open{b}Input(location);\n"
         "    return deserialize(in.readAllBytes());\n"
         "}",
         {"file", "database", "cache", "network", "disk"}},
        {"removes the {A} from the {B}",
         "public boolean remove{a}From{b}(Object key) {\n"
         "    int position = indexOf(key);\n"
         "    return delete(position);\n"
         "}",
         {"list", "cache", "map", "queue", "registry"}},
        {"prints the {A}",
         "public void print{a}(PrintStream console) {\n"
         "    console.println(describe());\n"
         "}",
         {}},
    };
    return t;
}

const std::vector<std::string>& nouns() {
    static const std::vector<std::string> n = {
        "image",    "packet",    "message",  "record",   "token",     "header",   "payload",  "node",
        "edge",     "graph",     "matrix",   "vector",   "cookie",    "session",  "user",     "account",
        "order",    "invoice",   "ticket",   "widget",   "panel",     "button",   "label",    "column",
        "row",      "table",     "schema",   "query",    "result",    "cursor",   "entry",    "item",
        "element",  "document",  "page",     "frame",    "channel",   "thread",   "task",     "job",
        "event",    "listener",  "handler",  "callback", "timer",     "clock",    "date",     "timestamp",
        "duration", "interval",  "color",    "font",     "icon",      "shape",    "point",    "polygon",
        "circle",   "rectangle", "texture",  "sprite",   "sound",     "track",    "album",    "playlist",
        "song",     "artist",    "movie",    "camera",   "sensor",    "device",   "driver",   "module",
        "plugin",   "archive",   "folder",   "directory", "path",     "link",     "address",  "host",
        "port",     "route",     "request",  "response", "reply",     "status",   "setting",  "option",
        "property", "attribute", "feature",  "profile",  "avatar",    "badge",    "comment",  "post",
        "topic",    "forum",     "vote",     "rating",   "review",    "score",    "level",    "stage",
        "scene",    "player",    "enemy",    "weapon",   "inventory", "wallet",   "coin",     "currency",
        "price",    "discount",  "coupon",   "cart",     "product",   "catalog",  "category", "tag",
        "keyword",  "license",   "certificate", "signature", "secret", "password", "credential", "role",
        "permission", "group",   "team",     "member",   "project",   "issue",    "milestone", "commit",
        "branch",   "patch",     "revision", "snapshot", "backup",    "report",   "chart",    "metric",
        "counter",  "gauge",     "histogram", "sample",  "batch",     "partition", "segment", "shard",
        "replica",  "cluster",   "tenant",   "region",   "zone",      "invoice",  "receipt",  "payment",
    };
    return n;
}

std::string capitalized(std::string s) {
    if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
    return s;
}

std::string fill(std::string text, const std::string& a, const std::string& b) {
    const std::pair<std::string, std::string> subs[] = {
        {"{A}", a}, {"{B}", b}, {"{a}", capitalized(a)}, {"{b}", capitalized(b)}};
    for (const auto& [key, value] : subs)
        for (auto pos = text.find(key); pos != std::string::npos; pos = text.find(key, pos + value.size()))
            text.replace(pos, key.size(), value);
    return text;
}

std::vector<std::string> unique_nouns() {
    std::vector<std::string> n = nouns();
    std::sort(n.begin(), n.end());
    n.erase(std::unique(n.begin(), n.end()), n.end());
    return n;
}

struct Sample {
    std::size_t t;
    std::string a;
    std::string b;
};

corpus::RawPair render(const Sample& s, const std::string& id) {
    const auto& tpl = templates()[s.t];
    return {id, fill(tpl.code, s.a, s.b), fill(tpl.summary, s.a, s.b)};
}

std::string make_id(const std::string& prefix, std::size_t i) {
    std::string num = std::to_string(i);
    return prefix + "-" + std::string(num.size() < 5 ? 5 - num.size() : 0, '0') + num;
}

} // namespace

std::size_t template_count() { return templates().size(); }
std::size_t filler_count() { return unique_nouns().size(); }

SynthCorpus generate(const SynthConfig& cfg) {
    auto pool = unique_nouns();
    const auto& tpls = templates();
    if (cfg.rare_fillers >= pool.size())
        throw UsageError("synth: " + std::to_string(cfg.rare_fillers) + " rare fillers requested, the noun list has " +
                         std::to_string(pool.size()));
    if (cfg.rare_min == 0 || cfg.rare_min > cfg.rare_max) throw UsageError("synth: need 1 <= rare_min <= rare_max");
    if (!(cfg.rare_test_share >= 0.0 && cfg.rare_test_share <= 1.0))
        throw UsageError("synth: rare_test_share must lie in [0, 1]");

    std::mt19937_64 rng(cfg.seed);
    std::shuffle(pool.begin(), pool.end(), rng);
    std::vector<std::string> rare(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(cfg.rare_fillers));
    const std::vector<std::string> common(pool.begin() + static_cast<std::ptrdiff_t>(cfg.rare_fillers), pool.end());

    const auto pick = [&](std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); };
    const auto pick_b = [&](std::size_t t) { return tpls[t].b.empty() ? std::string() : tpls[t].b[pick(tpls[t].b.size())]; };

    std::vector<Sample> train;
    for (const auto& f : rare) {
        const std::size_t n = cfg.rare_min + pick(cfg.rare_max - cfg.rare_min + 1);
        for (std::size_t k = 0; k < n; ++k) {
            const auto t = pick(tpls.size());
            train.push_back({t, f, pick_b(t)});
        }
    }
    if (train.size() > cfg.train_pairs)
        throw UsageError("synth: rare fillers alone need " + std::to_string(train.size()) + " training pairs");
    while (train.size() < cfg.train_pairs) {
        const auto t = pick(tpls.size());
        train.push_back({t, common[pick(common.size())], pick_b(t)});
    }
    std::shuffle(train.begin(), train.end(), rng);

    std::set<std::pair<std::size_t, std::string>> seen;
    for (const auto& s : train) seen.insert({s.t, s.a});
    std::set<std::tuple<std::size_t, std::string, std::string>> used;
    const auto held_out = [&](std::size_t count) {
        std::vector<Sample> out;
        std::size_t attempts = 0;
        while (out.size() < count) {
            if (++attempts > 1000 * (count + 1))
                throw UsageError("synth: not enough unseen pattern/filler combinations for the held-out splits");
            const bool use_rare = std::uniform_real_distribution<double>(0.0, 1.0)(rng) < cfg.rare_test_share;
            const auto& f = use_rare ? rare[pick(rare.size())] : common[pick(common.size())];
            const auto t = pick(tpls.size());
            if (seen.count({t, f})) continue;
            const auto b = pick_b(t);
            if (!used.insert({t, f, b}).second) continue;
            out.push_back({t, f, b});
        }
        return out;
    };
    const auto valid = held_out(cfg.valid_pairs);
    const auto test = held_out(cfg.test_pairs);

    SynthCorpus c;
    for (std::size_t i = 0; i < train.size(); ++i) c.train.push_back(render(train[i], make_id("train", i)));
    for (std::size_t i = 0; i < valid.size(); ++i) c.valid.push_back(render(valid[i], make_id("valid", i)));
    for (std::size_t i = 0; i < test.size(); ++i) c.test.push_back(render(test[i], make_id("test", i)));
    std::sort(rare.begin(), rare.end());
    c.rare = std::move(rare);
    return c;
}

} // namespace editsum::synth
