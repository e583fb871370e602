#pragma once

#include "neurotree/runner/checkpoint.hpp"

#include <functional>
#include <limits>
#include <optional>

namespace neurotree::runner {

struct LoopOptions {
    evolution::EvolutionConfig evolution;
    std::string dataset_id;
    std::uint64_t train_seed = 0;
    std::size_t workers = 1;
    double timeout_seconds = 0.0;
    /// Stop (resumably) once this much wall time has elapsed; <= 0 disables.
    double walltime_seconds = 0.0;
    /// Rewritten after initialization and after every generation when set.
    std::optional<std::filesystem::path> checkpoint_path;
    std::string config_fingerprint;
    /// Stop after this generation even if evolution.generations is larger.
    std::size_t stop_after = std::numeric_limits<std::size_t>::max();
    std::function<void(const evolution::GenerationLog&)> on_generation;
};

struct LoopResult {
    evolution::EvolutionState state;
    /// True when state.generation reached evolution.generations.
    bool completed = false;
    /// Evaluation requests over the whole run, resumed segments included.
    std::size_t requests_served = 0;
};

/// Initializes from `seeds` (or continues `resume`) and steps generations
/// until done, stop_after, or the walltime budget. A resumed run reproduces
/// the uninterrupted one exactly under a single worker. Throws
/// std::invalid_argument when `resume` carries another run's fingerprint.
LoopResult run_evolution(EvalRunner& runner, const gp::PrimitiveSet& pset, const std::vector<gp::Node>& seeds,
                         const LoopOptions& options, std::optional<Checkpoint> resume = std::nullopt);

} // namespace neurotree::runner
