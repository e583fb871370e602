#include "neurotree/runner/run_loop.hpp"

#include <spdlog/spdlog.h>

#include <chrono>

namespace neurotree::runner {

LoopResult run_evolution(EvalRunner& runner, const gp::PrimitiveSet& pset, const std::vector<gp::Node>& seeds,
                         const LoopOptions& options, std::optional<Checkpoint> resume)
{
    const auto& cfg = options.evolution;
    cfg.validate();
    const auto start = std::chrono::steady_clock::now();
    const auto evaluate =
        make_evaluator(runner, options.dataset_id, options.train_seed, options.workers, options.timeout_seconds);

    LoopResult result;
    std::size_t served_before = 0;
    const std::size_t served_at_start = runner.requests_served();
    if (resume) {
        if (resume->config_fingerprint != options.config_fingerprint) {
            throw std::invalid_argument("checkpoint belongs to a different run configuration");
        }
        for (const auto& [key, entry] : resume->cache) {
            runner.cache().insert(key, entry);
        }
        served_before = resume->requests_served;
        result.state = std::move(resume->state);
        spdlog::info("resumed at generation {}", result.state.generation);
    } else {
        result.state = evolution::initialize(seeds, pset, cfg, evaluate);
        if (options.on_generation) {
            options.on_generation(result.state.history.back());
        }
    }

    const auto save = [&] {
        if (options.checkpoint_path) {
            write_checkpoint(*options.checkpoint_path,
                             {result.state, runner.cache().entries(),
                              served_before + runner.requests_served() - served_at_start, options.config_fingerprint});
        }
    };
    if (!resume) {
        save();
    }

    const auto out_of_time = [&] {
        return options.walltime_seconds > 0 &&
               std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count() >=
                   options.walltime_seconds;
    };
    while (result.state.generation < cfg.generations && result.state.generation < options.stop_after) {
        if (out_of_time()) {
            spdlog::warn("walltime budget reached at generation {}", result.state.generation);
            break;
        }
        const auto log = evolution::generation_step(result.state, pset, cfg, evaluate);
        spdlog::info("generation {}: best_error {:.4f} archive {} hypervolume {:.6g} ({} cache hits, {:.1f}s)",
                     log.generation, log.best_error, log.archive_size, log.hypervolume, log.cache_hits,
                     log.wall_seconds);
        save();
        if (options.on_generation) {
            options.on_generation(log);
        }
    }
    result.completed = result.state.generation >= cfg.generations;
    result.requests_served = served_before + runner.requests_served() - served_at_start;
    return result;
}

} // namespace neurotree::runner
