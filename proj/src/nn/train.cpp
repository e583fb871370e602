#include "neurotree/nn/train.hpp"

#include "neurotree/nn/optimizer.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace neurotree::nn {

namespace {

constexpr std::size_t kEvalChunk = 256;

} // namespace

EarlyStopping::EarlyStopping(int patience) : patience_(patience)
{
    if (patience < 1) {
        throw std::invalid_argument("patience must be >= 1");
    }
}

bool EarlyStopping::observe(double val_loss)
{
    const int epoch = epochs_++;
    if (val_loss < best_loss_) {
        best_loss_ = val_loss;
        best_epoch_ = epoch;
        since_best_ = 0;
        return true;
    }
    ++since_best_;
    return false;
}

TrainReport train(Network<float>& net, const LabeledSplit& train_split, const TrainConfig& cfg, std::uint64_t seed,
                  const ValidationFn& validate)
{
    if (cfg.batch_size < 1 || cfg.max_epochs < 1) {
        throw std::invalid_argument("batch_size and max_epochs must be >= 1");
    }
    if (train_split.size() == 0) {
        throw std::invalid_argument("empty training split");
    }
    TrainReport report;
    Rng rng(seed);
    OptimizerState<float> opt(cfg.optimizer);
    EarlyStopping stopper(cfg.patience);
    std::optional<Snapshot<float>> best;
    const auto params = net.parameters();

    std::vector<std::size_t> order(train_split.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto batch = static_cast<std::size_t>(cfg.batch_size);

    for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
        rng.shuffle(order);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t start = 0; start < order.size(); start += batch) {
            const std::size_t end = std::min(order.size(), start + batch);
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
            const Tensor<float> x = gather_rows(train_split.instances, idx);
            std::vector<std::int32_t> y(idx.size());
            for (std::size_t i = 0; i < idx.size(); ++i) {
                y[i] = train_split.labels[idx[i]];
            }
            try {
                loss_sum += net.loss_and_gradients(x, y, rng);
            } catch (const NonFiniteLoss&) {
                report.diverged = true;
                break;
            }
            opt.step(params);
            ++batches;
        }
        if (report.diverged) {
            break;
        }
        const double val = validate(net);
        report.train_loss_curve.push_back(loss_sum / double(batches));
        report.val_loss_curve.push_back(val);
        report.epochs_run = epoch + 1;
        if (!std::isfinite(val) || !std::isfinite(report.train_loss_curve.back())) {
            report.diverged = true;
            break;
        }
        if (stopper.observe(val)) {
            best = net.snapshot();
        }
        if (stopper.should_stop()) {
            break;
        }
        if (cfg.deadline && std::chrono::steady_clock::now() >= *cfg.deadline) {
            report.timed_out = true;
            break;
        }
    }
    report.best_epoch = stopper.best_epoch();
    if (best) {
        net.restore(*best);
        report.restored = true;
    }
    return report;
}

TrainReport train(Network<float>& net, const LabeledSplit& train_split, const LabeledSplit& validation,
                  const TrainConfig& cfg, std::uint64_t seed)
{
    if (validation.size() == 0) {
        throw std::invalid_argument("empty validation split");
    }
    return train(net, train_split, cfg, seed, [&](Network<float>& n) { return evaluate_loss(n, validation); });
}

double evaluate_loss(Network<float>& net, const LabeledSplit& split)
{
    Rng unused(0);
    double total = 0.0;
    const std::size_t n = split.size();
    for (std::size_t start = 0; start < n; start += kEvalChunk) {
        const std::size_t end = std::min(n, start + kEvalChunk);
        std::vector<std::size_t> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const std::vector<std::int32_t> y(split.labels.begin() + static_cast<std::ptrdiff_t>(start),
                                          split.labels.begin() + static_cast<std::ptrdiff_t>(end));
        total += double(net.loss(gather_rows(split.instances, idx), y, Mode::Infer, unused)) * double(end - start);
    }
    return total / double(n);
}

std::vector<std::int32_t> predict(Network<float>& net, const Tensor<float>& instances)
{
    Rng unused(0);
    const std::size_t n = instances.batch();
    std::vector<std::int32_t> out;
    out.reserve(n);
    for (std::size_t start = 0; start < n; start += kEvalChunk) {
        const std::size_t end = std::min(n, start + kEvalChunk);
        std::vector<std::size_t> idx(end - start);
        std::iota(idx.begin(), idx.end(), start);
        const Tensor<float> z = net.logits(gather_rows(instances, idx), Mode::Infer, unused);
        const std::size_t k = z.dims.back();
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const float* row = z.data() + r * k;
            out.push_back(static_cast<std::int32_t>(std::max_element(row, row + k) - row));
        }
    }
    return out;
}

double error_rate(const std::vector<std::int32_t>& predictions, const std::vector<std::int32_t>& labels)
{
    if (predictions.size() != labels.size() || labels.empty()) {
        throw std::invalid_argument("prediction and label counts differ or are empty");
    }
    std::size_t wrong = 0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        wrong += predictions[i] != labels[i] ? 1 : 0;
    }
    return double(wrong) / double(labels.size());
}

ObjectiveVector objectives(Network<float>& net, const LabeledSplit& test)
{
    return {error_rate(predict(net, test.instances), test.labels), static_cast<std::int64_t>(net.param_count())};
}

} // namespace neurotree::nn
