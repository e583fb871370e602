// Command-line entry point: evolve, eval-one, report, make-stubs.

#include "neurotree/gp/expression.hpp"
#include "neurotree/io/config.hpp"
#include "neurotree/io/datasets.hpp"
#include "neurotree/io/reports.hpp"
#include "neurotree/nn/tensor_file.hpp"
#include "neurotree/primitives/stub_pretraining.hpp"
#include "neurotree/runner/run_loop.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <iostream>

using namespace neurotree;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitFailure = 1;

std::shared_ptr<const nn::StubRegistry> load_stubs(const std::filesystem::path& dir)
{
    if (dir.empty()) {
        return std::make_shared<const nn::StubRegistry>();
    }
    auto registry = nn::StubRegistry::load(dir);
    for (auto kind : gp::kPretrained) {
        if (!registry.loaded(kind)) {
            spdlog::warn("no checkpoint for {} in {}; using built-in weights", gp::to_string(kind), dir.string());
        }
    }
    return std::make_shared<const nn::StubRegistry>(std::move(registry));
}

int cmd_evolve(const std::filesystem::path& config_path, const std::optional<std::filesystem::path>& resume_path)
{
    const io::RunConfig config = io::load_run_config(config_path);
    const auto pset = primitives::standard_primitive_set();
    const std::string dataset_id = io::canonical_dataset_id(config.dataset_id);

    std::optional<runner::Checkpoint> resume;
    std::vector<gp::Node> seeds;
    if (resume_path) {
        resume = runner::read_checkpoint(*resume_path, pset);
    } else {
        seeds = evolution::read_seed_file(config.seed_file, pset);
    }

    runner::EvalRunner eval(pset, config.training, load_stubs(config.stubs_dir));
    runner::LoopOptions options;
    options.evolution = config.evolution;
    options.dataset_id = dataset_id;
    options.train_seed = config.train_seed;
    options.workers = config.workers;
    options.timeout_seconds = config.timeout;
    options.walltime_seconds = config.walltime;
    options.checkpoint_path = config.output_dir / io::kCheckpointFile;
    options.config_fingerprint = io::run_fingerprint(config);

    std::filesystem::create_directories(config.output_dir);
    {
        std::ofstream(config.output_dir / "config.ini") << io::serialize_run_config(config);
    }
    spdlog::info("evolving on {} (pop {}, {} generations, {} workers) into {}", dataset_id,
                 config.evolution.pop_size, config.evolution.generations, config.workers,
                 config.output_dir.string());

    const auto result = runner::run_evolution(eval, pset, seeds, options, std::move(resume));

    io::RunSummary summary;
    summary.config_fingerprint = options.config_fingerprint;
    summary.dataset_id = dataset_id;
    summary.generations_completed = result.state.generation;
    summary.completed = result.completed;
    summary.requests_served = result.requests_served;
    summary.best_error = result.state.archive.best_error();
    summary.hypervolume = result.state.archive.hypervolume(config.evolution.reference_point());
    summary.initial = result.state.history.front();
    io::write_run_artifacts(config.output_dir, result.state, summary);

    // Cache soundness spot check: one cached entry re-trained from scratch.
    const auto entries = eval.cache().entries();
    if (!entries.empty()) {
        Rng pick(config.evolution.rng_seed);
        const auto& key = entries[pick.index(entries.size())].first;
        if (!eval.recompute_matches(key)) {
            spdlog::error("cache entry for {} differs from a fresh evaluation", key.expression);
            return kExitFailure;
        }
    }

    std::cout << fmt::format("generations {} best_error {} archive {} evaluations {}\n", result.state.generation,
                             summary.best_error, result.state.archive.size(), result.requests_served);
    if (!result.completed) {
        spdlog::warn("walltime reached; continue with --resume {}", options.checkpoint_path->string());
    }
    return 0;
}

struct EvalOneArgs {
    std::string expression;
    std::string dataset = "blobs";
    std::uint64_t seed = 0;
    std::optional<std::filesystem::path> config;
    double timeout = 0.0;
};

int cmd_eval_one(const EvalOneArgs& args)
{
    const auto pset = primitives::standard_primitive_set();
    try {
        gp::parse_expression(args.expression, pset, gp::SemType::PredictionVector);
    } catch (const gp::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n" << args.expression << "\n"
                  << std::string(std::min(e.offset, args.expression.size()), ' ') << "^ offset " << e.offset << "\n";
        return kExitUsage;
    }
    runner::TrainingSettings training;
    std::filesystem::path stubs_dir;
    if (args.config) {
        const auto config = io::load_run_config(*args.config);
        training = config.training;
        stubs_dir = config.stubs_dir;
    }
    runner::EvalRunner eval(pset, training, load_stubs(stubs_dir));
    const std::string dataset = io::canonical_dataset_id(args.dataset);
    const auto root = gp::parse_expression(args.expression, pset, gp::SemType::PredictionVector);
    const auto r = eval.evaluate_batch({{0, gp::to_expression(root), dataset, args.seed}}, 1, args.timeout).front();

    std::cout << fmt::format("expression: {}\ndataset: {}\nstatus: {}\nerror_rate: {}\nparam_count: {}\n"
                             "epochs_run: {}\nbest_epoch: {}\nwall_seconds: {:.3f}\n",
                             gp::to_expression(root), dataset, primitives::to_string(r.status),
                             r.objectives.error_rate, r.objectives.param_count, r.epochs_run, r.best_epoch,
                             r.wall_time);
    if (!r.message.empty()) {
        std::cout << "message: " << r.message << "\n";
    }
    return r.status == primitives::EvalStatus::CompileError ? kExitFailure : 0;
}

int cmd_report(const std::filesystem::path& run_dir)
{
    const auto rows = io::write_report(run_dir);
    const auto& last = rows.back();
    std::cout << fmt::format("wrote {} and {} ({} generations, best accuracy {}, {} evaluations)\n",
                             (run_dir / io::kParetoJson).string(), (run_dir / io::kAccuracyCsv).string(),
                             last.generation, last.best_accuracy, last.evaluations_cumulative);
    return 0;
}

int cmd_make_stubs(const std::filesystem::path& out_dir, int epochs, std::uint64_t seed)
{
    // Bars (oriented edges) rather than the evolution datasets, so stubs
    // arrive with generic edge detectors instead of task knowledge.
    io::SyntheticSpec spec;
    spec.kind = io::SyntheticKind::Bars;
    spec.n = 600;
    spec.height = spec.width = 16;
    spec.classes = 4;
    spec.seed = seed;
    const DataPair data = io::make_synthetic(spec);
    std::filesystem::create_directories(out_dir);
    for (auto kind : gp::kPretrained) {
        primitives::StubPretraining opts;
        opts.epochs = epochs;
        opts.seed = seed + static_cast<std::uint64_t>(kind);
        const auto weights = primitives::pretrain_stub(kind, data, opts);
        const auto path = out_dir / nn::stub_file_name(kind);
        nn::save_tensors(path, weights);
        std::cout << "wrote " << path.string() << "\n";
    }
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Typed-GP neural architecture search at desk scale"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "Debug logging");

    auto* evolve = app.add_subcommand("evolve", "Run an evolution from a config file");
    std::filesystem::path config_path;
    std::optional<std::filesystem::path> resume_path;
    evolve->add_option("--config", config_path, "Run configuration (INI)")->required()->check(CLI::ExistingFile);
    evolve->add_option("--resume", resume_path, "Checkpoint to continue from")->check(CLI::ExistingFile);

    auto* eval_one = app.add_subcommand("eval-one", "Train and score one expression");
    EvalOneArgs eval_args;
    eval_one->add_option("--expr", eval_args.expression, "NNLearner expression")->required();
    eval_one->add_option("--dataset", eval_args.dataset, "Dataset id, e.g. blobs:n=300 or cifar10:dir=PATH")
        ->capture_default_str();
    eval_one->add_option("--seed", eval_args.seed, "Train seed")->capture_default_str();
    eval_one->add_option("--config", eval_args.config, "Take training settings from a run config")
        ->check(CLI::ExistingFile);
    eval_one->add_option("--timeout", eval_args.timeout, "Seconds; 0 disables")->capture_default_str();

    auto* report = app.add_subcommand("report", "Derive pareto.json and accuracy_curve.csv from a run");
    std::filesystem::path run_dir;
    report->add_option("--run", run_dir, "Run output directory")->required();

    auto* stubs = app.add_subcommand("make-stubs", "Pretrain the stub feature extractors");
    std::filesystem::path stubs_out = "data/stubs";
    int stub_epochs = 8;
    std::uint64_t stub_seed = 0;
    stubs->add_option("--out", stubs_out, "Output directory")->capture_default_str();
    stubs->add_option("--epochs", stub_epochs, "Training epochs per stub")->capture_default_str();
    stubs->add_option("--seed", stub_seed, "Seed")->capture_default_str();

    CLI11_PARSE(app, argc, argv);
    spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::info);

    try {
        if (*evolve) {
            return cmd_evolve(config_path, resume_path);
        }
        if (*eval_one) {
            return cmd_eval_one(eval_args);
        }
        if (*report) {
            return cmd_report(run_dir);
        }
        return cmd_make_stubs(stubs_out, stub_epochs, stub_seed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
