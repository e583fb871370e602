#include "neurotree/runner/checkpoint.hpp"

#include "neurotree/gp/expression.hpp"

#include <json.hpp>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>

namespace neurotree::runner {

namespace {

using nlohmann::json;

constexpr std::string_view kMagic = "neurotree-checkpoint ";
constexpr std::string_view kDigestTag = "sha256 ";

json objectives_json(const ObjectiveVector& o) { return json::array({o.error_rate, o.param_count}); }

ObjectiveVector objectives_from(const json& j) { return {j.at(0).get<double>(), j.at(1).get<std::int64_t>()}; }

json individual_json(const gp::Individual& ind)
{
    json j{{"id", ind.id},
           {"expression", gp::to_expression(ind.root)},
           {"origin", gp::to_string(ind.origin)},
           {"parents", ind.parent_ids}};
    j["objectives"] = ind.objectives ? objectives_json(*ind.objectives) : json(nullptr);
    return j;
}

gp::Individual individual_from(const json& j, const gp::PrimitiveSet& pset)
{
    gp::Individual ind;
    ind.id = j.at("id").get<std::uint64_t>();
    ind.root = gp::parse_expression(j.at("expression").get<std::string>(), pset, gp::SemType::PredictionVector);
    const auto origin = gp::origin_from_string(j.at("origin").get<std::string>());
    if (!origin) {
        throw CorruptCheckpoint("unknown origin " + j.at("origin").dump());
    }
    ind.origin = *origin;
    ind.parent_ids = j.at("parents").get<std::vector<std::uint64_t>>();
    if (!j.at("objectives").is_null()) {
        ind.objectives = objectives_from(j.at("objectives"));
    }
    return ind;
}

json log_json(const evolution::GenerationLog& log)
{
    return json{{"generation", log.generation},
                {"evaluated", log.evaluated},
                {"cache_hits", log.cache_hits},
                {"best_error", log.best_error},
                {"archive_size", log.archive_size},
                {"hypervolume", log.hypervolume},
                {"wall_seconds", log.wall_seconds},
                {"fired", log.operators.fired},
                {"changed", log.operators.changed},
                {"attempts", log.operators.attempts}};
}

evolution::GenerationLog log_from(const json& j)
{
    evolution::GenerationLog log;
    log.generation = j.at("generation").get<std::size_t>();
    log.evaluated = j.at("evaluated").get<std::size_t>();
    log.cache_hits = j.at("cache_hits").get<std::size_t>();
    log.best_error = j.at("best_error").get<double>();
    log.archive_size = j.at("archive_size").get<std::size_t>();
    log.hypervolume = j.at("hypervolume").get<double>();
    log.wall_seconds = j.at("wall_seconds").get<double>();
    log.operators.fired = j.at("fired").get<decltype(log.operators.fired)>();
    log.operators.changed = j.at("changed").get<decltype(log.operators.changed)>();
    log.operators.attempts = j.at("attempts").get<std::uint64_t>();
    return log;
}

} // namespace

std::string sha256_hex(std::string_view bytes)
{
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
        throw std::runtime_error("SHA-256 failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string out;
    out.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        out += kHex[digest[i] >> 4];
        out += kHex[digest[i] & 0xf];
    }
    return out;
}

std::string serialize_checkpoint(const Checkpoint& ckpt)
{
    const auto& s = ckpt.state;
    json body;
    body["generation"] = s.generation;
    body["next_id"] = s.next_id;
    body["rng"] = s.rng.save_state();
    body["config_fingerprint"] = ckpt.config_fingerprint;
    body["requests_served"] = ckpt.requests_served;
    body["population"] = json::array();
    for (const auto& ind : s.population) {
        body["population"].push_back(individual_json(ind));
    }
    body["archive"] = json::array();
    for (const auto& ind : s.archive.members()) {
        body["archive"].push_back(individual_json(ind));
    }
    body["history"] = json::array();
    for (const auto& log : s.history) {
        body["history"].push_back(log_json(log));
    }
    body["cache"] = json::array();
    for (const auto& [key, entry] : ckpt.cache) {
        body["cache"].push_back(json{{"expression", key.expression},
                                     {"dataset", key.dataset_id},
                                     {"train_seed", key.train_seed},
                                     {"objectives", objectives_json(entry.objectives)},
                                     {"status", primitives::to_string(entry.status)}});
    }
    std::string text = std::string(kMagic) + std::to_string(kCheckpointVersion) + "\n" + body.dump(1) + "\n";
    text += std::string(kDigestTag) + sha256_hex(text) + "\n";
    return text;
}

Checkpoint parse_checkpoint(const std::string& text, const gp::PrimitiveSet& pset)
{
    if (!text.starts_with(kMagic)) {
        throw CorruptCheckpoint("not a checkpoint (bad header)");
    }
    const auto tag = text.rfind(std::string("\n") + std::string(kDigestTag));
    if (tag == std::string::npos) {
        throw CorruptCheckpoint("missing digest footer (truncated?)");
    }
    const std::string_view covered(text.data(), tag + 1);
    std::string footer = text.substr(tag + 1 + kDigestTag.size());
    if (!footer.empty() && footer.back() == '\n') {
        footer.pop_back();
    }
    if (footer != sha256_hex(covered)) {
        throw CorruptCheckpoint("content digest mismatch");
    }

    const auto eol = text.find('\n');
    int version = 0;
    try {
        version = std::stoi(text.substr(kMagic.size(), eol - kMagic.size()));
    } catch (const std::exception&) {
        throw CorruptCheckpoint("unreadable version");
    }
    if (version < 1 || version > kCheckpointVersion) {
        throw CorruptCheckpoint("unsupported checkpoint version " + std::to_string(version));
    }

    Checkpoint ckpt;
    try {
        const json body = json::parse(covered.substr(eol + 1));
        auto& s = ckpt.state;
        s.generation = body.at("generation").get<std::size_t>();
        s.next_id = body.at("next_id").get<std::uint64_t>();
        s.rng.load_state(body.at("rng").get<std::string>());
        ckpt.config_fingerprint = body.at("config_fingerprint").get<std::string>();
        ckpt.requests_served = body.at("requests_served").get<std::size_t>();
        for (const auto& j : body.at("population")) {
            s.population.push_back(individual_from(j, pset));
        }
        for (const auto& j : body.at("archive")) {
            if (!s.archive.update(individual_from(j, pset))) {
                throw CorruptCheckpoint("archive members are not mutually non-dominated");
            }
        }
        for (const auto& j : body.at("history")) {
            s.history.push_back(log_from(j));
        }
        for (const auto& j : body.at("cache")) {
            const auto status = primitives::eval_status_from_string(j.at("status").get<std::string>());
            if (!status) {
                throw CorruptCheckpoint("unknown status " + j.at("status").dump());
            }
            ckpt.cache.push_back({CacheKey{j.at("expression").get<std::string>(), j.at("dataset").get<std::string>(),
                                           j.at("train_seed").get<std::uint64_t>()},
                                  CacheEntry{objectives_from(j.at("objectives")), *status}});
        }
    } catch (const CorruptCheckpoint&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptCheckpoint(std::string("malformed checkpoint body: ") + e.what());
    }
    return ckpt;
}

void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt)
{
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << serialize_checkpoint(ckpt);
        if (!out.flush()) {
            throw std::runtime_error("cannot write checkpoint " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Checkpoint read_checkpoint(const std::filesystem::path& path, const gp::PrimitiveSet& pset)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CorruptCheckpoint("cannot open checkpoint " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_checkpoint(buf.str(), pset);
}

} // namespace neurotree::runner
