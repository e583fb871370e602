#pragma once

#include "neurotree/nn/train.hpp"
#include "neurotree/primitives/library.hpp"

#include <chrono>
#include <optional>
#include <string>

namespace neurotree::primitives {

enum class EvalStatus : std::uint8_t { Ok, Timeout, Diverged, CompileError };

std::string_view to_string(EvalStatus s);
std::optional<EvalStatus> eval_status_from_string(std::string_view name);

struct LearnerOptions {
    std::uint64_t seed = 0;
    int patience = 5;
    int max_epochs = 30;
    std::size_t max_macs = nn::kDefaultMaxMacs;
    /// param_count assigned to failed individuals.
    std::int64_t max_params = kDefaultMaxParams;
    const nn::StubRegistry* stubs = nullptr;
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct LearnerOutcome {
    EvalStatus status = EvalStatus::Ok;
    ObjectiveVector objectives;
    nn::TrainReport report;
    /// Test-split class predictions; empty unless status is Ok.
    std::vector<std::int32_t> predictions;
    std::string message;
};

/// Runs an NNLearner tree end to end: preprocessing, compile, training with
/// early stopping on the validation split, and scoring on the test split.
/// Failures never throw; they come back as a non-Ok status with sentinel
/// objectives.
LearnerOutcome nnlearner(const gp::Node& root, const DataPair& base, const LearnerOptions& options);

} // namespace neurotree::primitives
