#pragma once

#include "neurotree/data.hpp"
#include "neurotree/nn/network.hpp"
#include "neurotree/objectives.hpp"

#include <chrono>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

namespace neurotree::nn {

struct TrainConfig {
    int batch_size = 32;
    gp::Optimizer optimizer = gp::Optimizer::Adam;
    int patience = 5;
    int max_epochs = 30;
    /// Checked between epochs only.
    std::optional<std::chrono::steady_clock::time_point> deadline;
};

struct TrainReport {
    int epochs_run = 0;
    int best_epoch = -1;
    std::vector<double> train_loss_curve;
    std::vector<double> val_loss_curve;
    bool restored = false;
    bool diverged = false;
    bool timed_out = false;
};

/// Patience counter over a validation-loss stream. Only a strict decrease
/// counts as an improvement.
class EarlyStopping {
public:
    explicit EarlyStopping(int patience);

    /// Records the next epoch's loss; true when it is the new best.
    bool observe(double val_loss);
    bool should_stop() const { return since_best_ >= patience_; }
    int best_epoch() const { return best_epoch_; }
    double best_loss() const { return best_loss_; }
    int epochs_observed() const { return epochs_; }

private:
    int patience_;
    int epochs_ = 0;
    int best_epoch_ = -1;
    int since_best_ = 0;
    double best_loss_ = std::numeric_limits<double>::infinity();
};

using ValidationFn = std::function<double(Network<float>&)>;

/// Mini-batch training with early stopping on `validate`'s loss; the
/// parameters and normalization buffers of the best epoch are restored.
TrainReport train(Network<float>& net, const LabeledSplit& train_split, const TrainConfig& cfg, std::uint64_t seed,
                  const ValidationFn& validate);

/// Validation loss is the inference-mode loss on `validation`.
TrainReport train(Network<float>& net, const LabeledSplit& train_split, const LabeledSplit& validation,
                  const TrainConfig& cfg, std::uint64_t seed);

/// Inference-mode loss (cross-entropy + L2) averaged over the split.
double evaluate_loss(Network<float>& net, const LabeledSplit& split);

std::vector<std::int32_t> predict(Network<float>& net, const Tensor<float>& instances);

double error_rate(const std::vector<std::int32_t>& predictions, const std::vector<std::int32_t>& labels);

/// Test-split error rate and trainable parameter count.
ObjectiveVector objectives(Network<float>& net, const LabeledSplit& test);

} // namespace neurotree::nn
