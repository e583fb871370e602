#pragma once

#include "neurotree/evolution/evolution.hpp"
#include "neurotree/runner/runner.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace neurotree::io {

/// Everything one `evolve` invocation needs. Sections and keys:
///   [evolution] pop_size n_select generations depth_limit rng_seed max_params
///   [operators] one rate per operator name (crossover, insert, ...)
///   [training]  patience max_epochs max_macs train_seed
///   [dataset]   id
///   [run]       seed_file output_dir stubs_dir workers timeout walltime
/// Relative paths resolve against the config file's directory.
struct RunConfig {
    evolution::EvolutionConfig evolution;
    runner::TrainingSettings training;
    std::uint64_t train_seed = 0;
    std::string dataset_id = "blobs";
    std::filesystem::path seed_file = "data/seeds.txt";
    std::filesystem::path output_dir = "runs/default";
    /// Empty: built-in stub weights.
    std::filesystem::path stubs_dir;
    std::size_t workers = 3;
    /// Per-individual training budget in seconds; 0 disables.
    double timeout = 3600.0;
    /// Whole-run budget in seconds; 0 disables.
    double walltime = 86400.0;

    RunConfig() { training.max_params = evolution.max_params; }

    /// Throws ConfigError on inconsistent values.
    void validate() const;
};

class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string file, std::size_t line, const std::string& detail)
        : std::runtime_error(file + (line ? ":" + std::to_string(line) : std::string()) + ": " + detail),
          file(std::move(file)),
          line(line)
    {
    }
    std::string file;
    /// 0 when the problem has no single line.
    std::size_t line;
};

/// `source` names the text in errors.
RunConfig parse_run_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
/// Every key, defaults included; parse_run_config(serialize) == config.
std::string serialize_run_config(const RunConfig& config);

bool operator==(const RunConfig& a, const RunConfig& b);

/// Digest of the settings that shape the search (not of paths, workers or
/// budgets), stored in checkpoints so a resume cannot switch experiments.
std::string run_fingerprint(const RunConfig& config);

} // namespace neurotree::io
