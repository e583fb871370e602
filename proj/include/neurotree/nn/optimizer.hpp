#pragma once

#include "neurotree/gp/types.hpp"
#include "neurotree/nn/ops.hpp"

#include <vector>

namespace neurotree::nn {

/// 0.01 for SGD (and Ftrl, which runs as SGD), 0.001 for the rest.
double default_learning_rate(gp::Optimizer kind);

/// Stateful update rule. Moment buffers are created lazily per parameter
/// slot and owned by this instance only.
template <typename T>
class OptimizerState {
public:
    explicit OptimizerState(gp::Optimizer kind, double learning_rate);
    explicit OptimizerState(gp::Optimizer kind) : OptimizerState(kind, default_learning_rate(kind)) {}

    /// Applies one update; `params` must be passed in the same order every call.
    void step(const std::vector<Parameter<T>*>& params);

    /// Kind actually applied (Ftrl reports SGD).
    gp::Optimizer effective_kind() const { return effective_; }
    gp::Optimizer requested_kind() const { return requested_; }
    double learning_rate() const { return lr_; }
    long steps() const { return t_; }

    static constexpr double kBeta1 = 0.9;
    static constexpr double kBeta2 = 0.999;
    static constexpr double kEpsilon = 1e-7;
    static constexpr double kRho = 0.9;
    static constexpr double kAdadeltaRho = 0.95;
    static constexpr double kAdagradInit = 0.1;

private:
    gp::Optimizer requested_;
    gp::Optimizer effective_;
    double lr_;
    long t_ = 0;
    std::vector<std::vector<double>> m_;
    std::vector<std::vector<double>> v_;
};

} // namespace neurotree::nn
