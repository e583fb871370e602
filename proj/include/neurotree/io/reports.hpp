#pragma once

#include "neurotree/evolution/evolution.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::io {

/// Files `evolve` writes into its output directory.
inline constexpr const char* kGenerationsCsv = "generations.csv";
inline constexpr const char* kArchiveJson = "archive.json";
inline constexpr const char* kSummaryJson = "run_summary.json";
inline constexpr const char* kCheckpointFile = "checkpoint.ckpt";
/// Files `report` derives from them.
inline constexpr const char* kParetoJson = "pareto.json";
inline constexpr const char* kAccuracyCsv = "accuracy_curve.csv";

inline constexpr const char* kGenerationsHeader = "generation,evaluated,cache_hits,best_error,archive_size,wall_seconds";
inline constexpr const char* kAccuracyHeader = "generation,best_accuracy,archive_size,evaluations_cumulative";

class MissingArtifacts : public std::runtime_error {
public:
    MissingArtifacts(const std::filesystem::path& dir, std::vector<std::string> missing);
    std::vector<std::string> missing;
};

/// One row per evolved generation (1..G). Generation 0 lives in the summary.
std::string generations_csv(const std::vector<evolution::GenerationLog>& history);

/// Members in archive order: {expression, error_rate, param_count, id, origin}.
std::string pareto_json(const evolution::ParetoArchive& archive);

struct RunSummary {
    std::string config_fingerprint;
    std::string dataset_id;
    std::size_t generations_completed = 0;
    bool completed = false;
    std::size_t requests_served = 0;
    double best_error = 1.0;
    double hypervolume = 0.0;
    /// Generation 0, the evaluated initial population.
    evolution::GenerationLog initial;
};

std::string summary_json(const RunSummary& summary);

/// Writes generations.csv, archive.json and run_summary.json into `dir`.
void write_run_artifacts(const std::filesystem::path& dir, const evolution::EvolutionState& state,
                         const RunSummary& summary);

struct AccuracyRow {
    std::size_t generation = 0;
    double best_accuracy = 0.0;
    std::size_t archive_size = 0;
    std::size_t evaluations_cumulative = 0;
};

/// Rows for generations 0..G from `evolve`'s artifacts in `run_dir`; writes
/// pareto.json and accuracy_curve.csv next to them. Throws MissingArtifacts.
std::vector<AccuracyRow> write_report(const std::filesystem::path& run_dir);

/// Parsed generations.csv; throws std::runtime_error on a malformed row.
std::vector<evolution::GenerationLog> read_generations_csv(const std::filesystem::path& file);

} // namespace neurotree::io
