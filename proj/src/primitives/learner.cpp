#include "neurotree/primitives/learner.hpp"

#include "neurotree/preprocess/transforms.hpp"

namespace neurotree::primitives {

namespace {

// Keeps the weight-init stream distinct from the shuffling/dropout stream.
constexpr std::uint64_t kTrainSeedSalt = 0x9e3779b97f4a7c15ull;

LearnerOutcome failure(EvalStatus status, const LearnerOptions& options, std::string message)
{
    LearnerOutcome out;
    out.status = status;
    out.objectives = ObjectiveVector::sentinel(options.max_params);
    out.message = std::move(message);
    return out;
}

} // namespace

std::string_view to_string(EvalStatus s)
{
    switch (s) {
    case EvalStatus::Ok: return "ok";
    case EvalStatus::Timeout: return "timeout";
    case EvalStatus::Diverged: return "diverged";
    case EvalStatus::CompileError: return "compile_error";
    }
    return "?";
}

std::optional<EvalStatus> eval_status_from_string(std::string_view name)
{
    for (auto s : {EvalStatus::Ok, EvalStatus::Timeout, EvalStatus::Diverged, EvalStatus::CompileError}) {
        if (to_string(s) == name) {
            return s;
        }
    }
    return std::nullopt;
}

LearnerOutcome nnlearner(const gp::Node& root, const DataPair& base, const LearnerOptions& options)
{
    LearnerSpec spec;
    std::optional<nn::Network<float>> net;
    try {
        spec = interpret(root, base);
        nn::CompileOptions copts;
        copts.seed = options.seed;
        copts.stubs = options.stubs;
        copts.max_macs = options.max_macs;
        net.emplace(nn::compile<float>(spec.layers, spec.data.instance_shape(), spec.data.n_classes, copts));
    } catch (const nn::CompileError& e) {
        return failure(EvalStatus::CompileError, options, e.what());
    } catch (const preprocess::PreprocessError& e) {
        return failure(EvalStatus::CompileError, options, e.what());
    } catch (const std::invalid_argument& e) {
        return failure(EvalStatus::CompileError, options, e.what());
    }

    nn::TrainConfig cfg;
    cfg.batch_size = spec.batch_size;
    cfg.optimizer = spec.optimizer;
    cfg.patience = options.patience;
    cfg.max_epochs = options.max_epochs;
    cfg.deadline = options.deadline;

    LearnerOutcome out;
    out.report = nn::train(*net, spec.data.train, spec.data.validation, cfg, options.seed ^ kTrainSeedSalt);
    if (out.report.diverged) {
        auto f = failure(EvalStatus::Diverged, options, "training loss became non-finite");
        f.report = out.report;
        return f;
    }
    if (out.report.timed_out) {
        auto f = failure(EvalStatus::Timeout, options, "evaluation exceeded its time budget");
        f.report = out.report;
        return f;
    }
    out.predictions = nn::predict(*net, spec.data.test.instances);
    out.objectives = {nn::error_rate(out.predictions, spec.data.test.labels),
                      static_cast<std::int64_t>(net->param_count())};
    return out;
}

} // namespace neurotree::primitives
