#include "neurotree/io/config.hpp"

#include "neurotree/runner/checkpoint.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

namespace neurotree::io {

namespace {

namespace pt = boost::property_tree;

/// Line of `key` inside `[section]`, 0 when not found.
std::size_t line_of(const std::string& text, const std::string& section, const std::string& key)
{
    std::istringstream in(text);
    std::string line;
    std::string current;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        const auto first = line.find_first_not_of(" \t");
        if (first == std::string::npos) {
            continue;
        }
        if (line[first] == '[') {
            current = line.substr(first + 1, line.find(']') - first - 1);
            if (key.empty() && current == section) {
                return n;
            }
            continue;
        }
        if (current == section && !key.empty()) {
            auto name = line.substr(first, line.find('=') - first);
            name.erase(name.find_last_not_of(" \t") + 1);
            if (name == key) {
                return n;
            }
        }
    }
    return 0;
}

template <typename T>
T parse_number(const std::string& raw)
{
    T value{};
    const char* end = raw.data() + raw.size();
    const auto [ptr, ec] = std::from_chars(raw.data(), end, value);
    if (ec != std::errc{} || ptr != end) {
        throw std::invalid_argument("'" + raw + "' is not a valid number");
    }
    return value;
}

class Reader {
public:
    Reader(const pt::ptree& tree, const std::string& text, std::string source)
        : tree_(tree), text_(text), source_(std::move(source))
    {
    }

    template <typename T>
    void read(const std::string& section, const std::string& key, T& out)
    {
        const auto sec = tree_.get_child_optional(section);
        if (!sec) {
            return;
        }
        const auto raw = sec->get_optional<std::string>(key);
        if (!raw) {
            return;
        }
        try {
            if constexpr (std::is_same_v<T, std::string>) {
                out = *raw;
            } else if constexpr (std::is_same_v<T, std::filesystem::path>) {
                out = *raw;
            } else {
                out = parse_number<T>(*raw);
            }
        } catch (const std::invalid_argument& e) {
            throw ConfigError(source_, line_of(text_, section, key), section + "." + key + ": " + e.what());
        }
    }

    [[noreturn]] void fail(const std::string& section, const std::string& key, const std::string& detail) const
    {
        throw ConfigError(source_, line_of(text_, section, key), detail);
    }

private:
    const pt::ptree& tree_;
    const std::string& text_;
    std::string source_;
};

const std::map<std::string, std::set<std::string>>& known_keys()
{
    static const std::map<std::string, std::set<std::string>> keys = [] {
        std::map<std::string, std::set<std::string>> k{
            {"evolution", {"pop_size", "n_select", "generations", "depth_limit", "rng_seed", "max_params"}},
            {"operators", {}},
            {"training", {"patience", "max_epochs", "max_macs", "train_seed"}},
            {"dataset", {"id"}},
            {"run", {"seed_file", "output_dir", "stubs_dir", "workers", "timeout", "walltime"}},
        };
        for (auto op : evolution::kOperators) {
            k["operators"].insert(std::string(evolution::to_string(op)));
        }
        return k;
    }();
    return keys;
}

} // namespace

void RunConfig::validate() const
{
    evolution.validate();
    if (workers < 1) {
        throw std::invalid_argument("workers must be >= 1");
    }
    if (training.patience < 1 || training.max_epochs < 1) {
        throw std::invalid_argument("patience and max_epochs must be >= 1");
    }
    if (timeout < 0 || walltime < 0) {
        throw std::invalid_argument("timeout and walltime must be >= 0");
    }
    if (dataset_id.empty()) {
        throw std::invalid_argument("dataset id must not be empty");
    }
}

RunConfig parse_run_config(const std::string& text, const std::string& source)
{
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(source, e.line(), e.message());
    }

    Reader r(tree, text, source);
    for (const auto& [section, body] : tree) {
        const auto known = known_keys().find(section);
        if (known == known_keys().end()) {
            if (body.empty() && line_of(text, section, "") == 0) {
                r.fail("", section, "key '" + section + "' outside any section");
            }
            r.fail(section, "", "unknown section [" + section + "]");
        }
        for (const auto& [key, value] : body) {
            if (!known->second.contains(key)) {
                r.fail(section, key, "unknown key '" + key + "' in [" + section + "]");
            }
        }
    }

    RunConfig c;
    r.read("evolution", "pop_size", c.evolution.pop_size);
    r.read("evolution", "n_select", c.evolution.n_select);
    r.read("evolution", "generations", c.evolution.generations);
    r.read("evolution", "depth_limit", c.evolution.depth_limit);
    r.read("evolution", "rng_seed", c.evolution.rng_seed);
    r.read("evolution", "max_params", c.evolution.max_params);
    for (auto op : evolution::kOperators) {
        r.read("operators", std::string(evolution::to_string(op)), c.evolution.operator_rates[static_cast<std::size_t>(op)]);
    }
    r.read("training", "patience", c.training.patience);
    r.read("training", "max_epochs", c.training.max_epochs);
    r.read("training", "max_macs", c.training.max_macs);
    r.read("training", "train_seed", c.train_seed);
    c.training.max_params = c.evolution.max_params;
    r.read("dataset", "id", c.dataset_id);
    r.read("run", "seed_file", c.seed_file);
    r.read("run", "output_dir", c.output_dir);
    r.read("run", "stubs_dir", c.stubs_dir);
    r.read("run", "workers", c.workers);
    r.read("run", "timeout", c.timeout);
    r.read("run", "walltime", c.walltime);
    try {
        c.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(source, 0, e.what());
    }
    return c;
}

RunConfig load_run_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ConfigError(path.string(), 0, "cannot open config file");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    RunConfig c = parse_run_config(buf.str(), path.string());
    const auto base = path.parent_path();
    for (auto* p : {&c.seed_file, &c.stubs_dir}) {
        if (!p->empty() && p->is_relative()) {
            *p = (base / *p).lexically_normal();
        }
    }
    return c;
}

std::string serialize_run_config(const RunConfig& c)
{
    std::string out;
    const auto& e = c.evolution;
    out += "[evolution]\n";
    out += fmt::format("pop_size = {}\nn_select = {}\ngenerations = {}\ndepth_limit = {}\nrng_seed = {}\n"
                       "max_params = {}\n",
                       e.pop_size, e.n_select, e.generations, e.depth_limit, e.rng_seed, e.max_params);
    out += "\n[operators]\n";
    for (auto op : evolution::kOperators) {
        out += fmt::format("{} = {}\n", evolution::to_string(op), e.operator_rates[static_cast<std::size_t>(op)]);
    }
    out += "\n[training]\n";
    out += fmt::format("patience = {}\nmax_epochs = {}\nmax_macs = {}\ntrain_seed = {}\n", c.training.patience,
                       c.training.max_epochs, c.training.max_macs, c.train_seed);
    out += fmt::format("\n[dataset]\nid = {}\n", c.dataset_id);
    out += "\n[run]\n";
    out += fmt::format("seed_file = {}\noutput_dir = {}\nstubs_dir = {}\nworkers = {}\ntimeout = {}\nwalltime = {}\n",
                       c.seed_file.string(), c.output_dir.string(), c.stubs_dir.string(), c.workers, c.timeout,
                       c.walltime);
    return out;
}

bool operator==(const RunConfig& a, const RunConfig& b)
{
    const auto evo = [](const evolution::EvolutionConfig& e) {
        return std::tie(e.pop_size, e.n_select, e.generations, e.operator_rates, e.depth_limit, e.rng_seed,
                        e.max_params);
    };
    const auto train = [](const runner::TrainingSettings& t) {
        return std::tie(t.patience, t.max_epochs, t.max_macs, t.max_params);
    };
    return evo(a.evolution) == evo(b.evolution) && train(a.training) == train(b.training) &&
           std::tie(a.train_seed, a.dataset_id, a.seed_file, a.output_dir, a.stubs_dir, a.workers, a.timeout,
                    a.walltime) == std::tie(b.train_seed, b.dataset_id, b.seed_file, b.output_dir, b.stubs_dir,
                                            b.workers, b.timeout, b.walltime);
}

std::string run_fingerprint(const RunConfig& c)
{
    RunConfig shaping = c;
    shaping.seed_file.clear();
    shaping.output_dir.clear();
    shaping.stubs_dir.clear();
    shaping.workers = 1;
    shaping.timeout = 0;
    shaping.walltime = 0;
    shaping.evolution.generations = 0;
    return runner::sha256_hex(serialize_run_config(shaping)).substr(0, 16);
}

} // namespace neurotree::io
