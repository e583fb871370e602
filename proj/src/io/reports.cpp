#include "neurotree/io/reports.hpp"

#include "neurotree/gp/expression.hpp"

#include <fmt/format.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

namespace neurotree::io {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& items)
{
    std::string out;
    for (const auto& s : items) {
        out += (out.empty() ? "" : ", ") + s;
    }
    return out;
}

void write_text(const std::filesystem::path& file, const std::string& text)
{
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out.flush()) {
        throw std::runtime_error("cannot write " + file.string());
    }
}

std::string read_text(const std::filesystem::path& file)
{
    std::ifstream in(file, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

json member_json(const gp::Individual& m)
{
    return json{{"expression", gp::to_expression(m.root)},
                {"error_rate", m.objectives->error_rate},
                {"param_count", m.objectives->param_count},
                {"id", m.id},
                {"origin", gp::to_string(m.origin)}};
}

json log_json(const evolution::GenerationLog& log)
{
    return json{{"generation", log.generation},     {"evaluated", log.evaluated},
                {"cache_hits", log.cache_hits},     {"best_error", log.best_error},
                {"archive_size", log.archive_size}, {"hypervolume", log.hypervolume},
                {"wall_seconds", log.wall_seconds}};
}

} // namespace

MissingArtifacts::MissingArtifacts(const std::filesystem::path& dir, std::vector<std::string> missing)
    : std::runtime_error("run directory " + dir.string() + " lacks " + join(missing)), missing(std::move(missing))
{
}

std::string generations_csv(const std::vector<evolution::GenerationLog>& history)
{
    std::string out = std::string(kGenerationsHeader) + "\n";
    for (const auto& log : history) {
        if (log.generation == 0) {
            continue;
        }
        out += fmt::format("{},{},{},{},{},{}\n", log.generation, log.evaluated, log.cache_hits, log.best_error,
                           log.archive_size, log.wall_seconds);
    }
    return out;
}

std::string pareto_json(const evolution::ParetoArchive& archive)
{
    json arr = json::array();
    for (const auto& m : archive.members()) {
        arr.push_back(member_json(m));
    }
    return arr.dump(2) + "\n";
}

std::string summary_json(const RunSummary& s)
{
    const json j{{"config_fingerprint", s.config_fingerprint},
                 {"dataset", s.dataset_id},
                 {"generations_completed", s.generations_completed},
                 {"completed", s.completed},
                 {"requests_served", s.requests_served},
                 {"best_error", s.best_error},
                 {"hypervolume", s.hypervolume},
                 {"initial", log_json(s.initial)}};
    return j.dump(2) + "\n";
}

void write_run_artifacts(const std::filesystem::path& dir, const evolution::EvolutionState& state,
                         const RunSummary& summary)
{
    std::filesystem::create_directories(dir);
    write_text(dir / kGenerationsCsv, generations_csv(state.history));
    json archive = json::array();
    for (const auto& m : state.archive.members()) {
        auto j = member_json(m);
        j["parents"] = m.parent_ids;
        archive.push_back(std::move(j));
    }
    write_text(dir / kArchiveJson, archive.dump(2) + "\n");
    write_text(dir / kSummaryJson, summary_json(summary));
}

std::vector<evolution::GenerationLog> read_generations_csv(const std::filesystem::path& file)
{
    std::istringstream in(read_text(file));
    std::string line;
    if (!std::getline(in, line) || line != kGenerationsHeader) {
        throw std::runtime_error(file.string() + ": unexpected header");
    }
    std::vector<evolution::GenerationLog> out;
    for (std::size_t n = 2; std::getline(in, line); ++n) {
        if (line.empty()) {
            continue;
        }
        std::vector<std::string> cells;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) {
            cells.push_back(cell);
        }
        if (cells.size() != 6) {
            throw std::runtime_error(file.string() + ":" + std::to_string(n) + ": expected 6 columns");
        }
        try {
            evolution::GenerationLog log;
            log.generation = std::stoull(cells[0]);
            log.evaluated = std::stoull(cells[1]);
            log.cache_hits = std::stoull(cells[2]);
            log.best_error = std::stod(cells[3]);
            log.archive_size = std::stoull(cells[4]);
            log.wall_seconds = std::stod(cells[5]);
            out.push_back(log);
        } catch (const std::logic_error&) {
            throw std::runtime_error(file.string() + ":" + std::to_string(n) + ": malformed number");
        }
    }
    return out;
}

std::vector<AccuracyRow> write_report(const std::filesystem::path& run_dir)
{
    std::vector<std::string> missing;
    for (const char* name : {kGenerationsCsv, kArchiveJson, kSummaryJson}) {
        if (!std::filesystem::is_regular_file(run_dir / name)) {
            missing.emplace_back(name);
        }
    }
    if (!missing.empty()) {
        throw MissingArtifacts(run_dir, std::move(missing));
    }

    const json summary = json::parse(read_text(run_dir / kSummaryJson));
    const json archive = json::parse(read_text(run_dir / kArchiveJson));
    const auto generations = read_generations_csv(run_dir / kGenerationsCsv);

    json pareto = json::array();
    for (const auto& m : archive) {
        pareto.push_back(json{{"expression", m.at("expression")},
                              {"error_rate", m.at("error_rate")},
                              {"param_count", m.at("param_count")},
                              {"id", m.at("id")},
                              {"origin", m.at("origin")}});
    }
    write_text(run_dir / kParetoJson, pareto.dump(2) + "\n");

    std::vector<AccuracyRow> rows;
    const auto& initial = summary.at("initial");
    AccuracyRow row{0, 1.0 - initial.at("best_error").get<double>(), initial.at("archive_size").get<std::size_t>(),
                    initial.at("evaluated").get<std::size_t>()};
    rows.push_back(row);
    for (const auto& g : generations) {
        row.generation = g.generation;
        row.best_accuracy = 1.0 - g.best_error;
        row.archive_size = g.archive_size;
        row.evaluations_cumulative += g.evaluated;
        rows.push_back(row);
    }
    std::string csv = std::string(kAccuracyHeader) + "\n";
    for (const auto& r : rows) {
        csv += fmt::format("{},{},{},{}\n", r.generation, r.best_accuracy, r.archive_size, r.evaluations_cumulative);
    }
    write_text(run_dir / kAccuracyCsv, csv);
    return rows;
}

} // namespace neurotree::io
