#pragma once

#include "neurotree/evolution/operators.hpp"
#include "neurotree/evolution/pareto.hpp"

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace neurotree::evolution {

/// Per-operator application probabilities, indexed by OperatorId.
using OperatorRates = std::array<double, kOperatorCount>;

/// crossover 0.5, crossover_ephemeral 0.5, headless_chicken 0.1,
/// headless_chicken_ephemeral 0.1, insert 0.05, insert_modify 0.1,
/// ephemeral 0.25, uniform/shrink/swap/remove/add 0.05; the operators with no
/// published rate (preserving crossover, activation/optimizer/pretrained
/// mutation) 0.05.
OperatorRates default_operator_rates();

struct EvolutionConfig {
    std::size_t pop_size = 64;
    /// Parents per generation; 0 means pop_size / 2.
    std::size_t n_select = 0;
    std::size_t generations = 10;
    OperatorRates operator_rates = default_operator_rates();
    int depth_limit = kDefaultDepthLimit;
    std::uint64_t rng_seed = 0;
    /// Worst-case parameter count: sentinel objective and hypervolume reference.
    std::int64_t max_params = kDefaultMaxParams;

    std::size_t parents() const { return n_select == 0 ? pop_size / 2 : n_select; }
    ObjectiveVector reference_point() const { return {1.0, max_params}; }
    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

class SeedParseError : public std::runtime_error {
public:
    SeedParseError(std::string file, std::size_t line, const std::string& detail)
        : std::runtime_error(file + ":" + std::to_string(line) + ": " + detail), file(std::move(file)), line(line)
    {
    }
    std::string file;
    std::size_t line;
};

/// Parses newline-delimited NNLearner expressions; blank lines and lines
/// starting with '#' are skipped. `source` names the input in errors.
std::vector<gp::Node> parse_seed_lines(std::istream& in, const gp::PrimitiveSet& pset, const std::string& source);
std::vector<gp::Node> read_seed_file(const std::filesystem::path& path, const gp::PrimitiveSet& pset);

/// Seeds first (origin Seed, ids from `next_id`), then ramped half-and-half
/// random trees up to cfg.pop_size. Extra seeds beyond pop_size are dropped.
std::vector<gp::Individual> seed_population(const std::vector<gp::Node>& seeds, const gp::PrimitiveSet& pset,
                                            const EvolutionConfig& cfg, Rng& rng, std::uint64_t& next_id);

/// Firing counters per operator. `fired` counts Bernoulli successes;
/// `changed` counts firings whose result differs from the operand.
struct OperatorStats {
    std::array<std::uint64_t, kOperatorCount> fired{};
    std::array<std::uint64_t, kOperatorCount> changed{};
    std::uint64_t attempts = 0;

    OperatorStats& operator+=(const OperatorStats& o);
};

/// One offspring-creation attempt: starting from `parent`, every operator
/// fires independently with its rate, in kOperators order, each acting on
/// the result of the previous one. Mating operators use `mate`.
gp::Node create_offspring(const gp::Node& parent, const gp::Node& mate, const EvolutionConfig& cfg,
                          const OperatorContext& ctx, Rng& rng, OperatorStats& stats);

/// Objectives for a batch, in request order, plus how many came from cache.
struct BatchOutcome {
    std::vector<ObjectiveVector> objectives;
    std::size_t cache_hits = 0;
};
using Evaluator = std::function<BatchOutcome(const std::vector<gp::Individual>&)>;

struct GenerationLog {
    std::size_t generation = 0;
    std::size_t evaluated = 0;
    std::size_t cache_hits = 0;
    double best_error = 1.0;
    std::size_t archive_size = 0;
    double hypervolume = 0.0;
    double wall_seconds = 0.0;
    OperatorStats operators;
};

/// Everything a run carries from one generation to the next.
struct EvolutionState {
    std::size_t generation = 0;
    std::vector<gp::Individual> population;
    ParetoArchive archive;
    Rng rng;
    std::uint64_t next_id = 0;
    /// Generation 0 (initial evaluation) first.
    std::vector<GenerationLog> history;
};

/// Builds and evaluates the initial population; logs it as generation 0.
EvolutionState initialize(const std::vector<gp::Node>& seeds, const gp::PrimitiveSet& pset,
                          const EvolutionConfig& cfg, const Evaluator& evaluate);

/// Selects parents by NSGA-II, pairs them after a shuffle, creates one
/// offspring per parent, evaluates them, keeps nsga2_select(population ∪
/// offspring, pop_size) and folds offspring into the archive.
GenerationLog generation_step(EvolutionState& state, const gp::PrimitiveSet& pset, const EvolutionConfig& cfg,
                              const Evaluator& evaluate);

} // namespace neurotree::evolution
