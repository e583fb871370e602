#include "neurotree/nn/optimizer.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <stdexcept>

namespace neurotree::nn {

using gp::Optimizer;

namespace {

void warn_ftrl_once()
{
    static std::once_flag warned;
    std::call_once(warned, [] { spdlog::warn("optimizer ftrl is not implemented; training with sgd instead"); });
}

} // namespace

double default_learning_rate(Optimizer kind)
{
    return kind == Optimizer::SGD || kind == Optimizer::Ftrl ? 0.01 : 0.001;
}

template <typename T>
OptimizerState<T>::OptimizerState(Optimizer kind, double learning_rate)
    : requested_(kind), effective_(kind == Optimizer::Ftrl ? Optimizer::SGD : kind), lr_(learning_rate)
{
    if (kind == Optimizer::Ftrl) {
        warn_ftrl_once();
    }
    if (!(learning_rate > 0.0)) {
        throw std::invalid_argument("learning rate must be positive");
    }
}

template <typename T>
void OptimizerState<T>::step(const std::vector<Parameter<T>*>& params)
{
    ++t_;
    const bool needs_m = effective_ != Optimizer::SGD;
    if (m_.empty() && needs_m) {
        m_.resize(params.size());
        v_.resize(params.size());
        for (std::size_t i = 0; i < params.size(); ++i) {
            const double init = effective_ == Optimizer::Adagrad ? kAdagradInit : 0.0;
            m_[i].assign(params[i]->value.size(), init);
            v_[i].assign(params[i]->value.size(), 0.0);
        }
    }
    if (needs_m && m_.size() != params.size()) {
        throw std::invalid_argument("optimizer called with a different parameter list");
    }
    const double t = static_cast<double>(t_);
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto& w = params[i]->value.values;
        const auto& g = params[i]->grad.values;
        switch (effective_) {
        case Optimizer::SGD:
        case Optimizer::Ftrl:
            for (std::size_t j = 0; j < w.size(); ++j) {
                w[j] -= static_cast<T>(lr_ * g[j]);
            }
            break;
        case Optimizer::Adam: {
            const double c1 = 1.0 - std::pow(kBeta1, t);
            const double c2 = 1.0 - std::pow(kBeta2, t);
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] = kBeta1 * m_[i][j] + (1 - kBeta1) * g[j];
                v_[i][j] = kBeta2 * v_[i][j] + (1 - kBeta2) * double(g[j]) * g[j];
                w[j] -= static_cast<T>(lr_ * (m_[i][j] / c1) / (std::sqrt(v_[i][j] / c2) + kEpsilon));
            }
            break;
        }
        case Optimizer::RMSprop:
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] = kRho * m_[i][j] + (1 - kRho) * double(g[j]) * g[j];
                w[j] -= static_cast<T>(lr_ * g[j] / (std::sqrt(m_[i][j]) + kEpsilon));
            }
            break;
        case Optimizer::Adadelta:
            // m: running E[g^2], v: running E[dx^2].
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] = kAdadeltaRho * m_[i][j] + (1 - kAdadeltaRho) * double(g[j]) * g[j];
                const double dx = std::sqrt(v_[i][j] + kEpsilon) / std::sqrt(m_[i][j] + kEpsilon) * g[j];
                v_[i][j] = kAdadeltaRho * v_[i][j] + (1 - kAdadeltaRho) * dx * dx;
                w[j] -= static_cast<T>(lr_ * dx);
            }
            break;
        case Optimizer::Adagrad:
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] += double(g[j]) * g[j];
                w[j] -= static_cast<T>(lr_ * g[j] / (std::sqrt(m_[i][j]) + kEpsilon));
            }
            break;
        case Optimizer::Adamax: {
            const double c1 = 1.0 - std::pow(kBeta1, t);
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] = kBeta1 * m_[i][j] + (1 - kBeta1) * g[j];
                v_[i][j] = std::max(kBeta2 * v_[i][j], std::abs(double(g[j])));
                w[j] -= static_cast<T>(lr_ / c1 * m_[i][j] / (v_[i][j] + kEpsilon));
            }
            break;
        }
        case Optimizer::Nadam: {
            const double c1 = 1.0 - std::pow(kBeta1, t);
            const double c1_next = 1.0 - std::pow(kBeta1, t + 1);
            const double c2 = 1.0 - std::pow(kBeta2, t);
            for (std::size_t j = 0; j < w.size(); ++j) {
                m_[i][j] = kBeta1 * m_[i][j] + (1 - kBeta1) * g[j];
                v_[i][j] = kBeta2 * v_[i][j] + (1 - kBeta2) * double(g[j]) * g[j];
                const double m_hat = kBeta1 * m_[i][j] / c1_next + (1 - kBeta1) * g[j] / c1;
                w[j] -= static_cast<T>(lr_ * m_hat / (std::sqrt(v_[i][j] / c2) + kEpsilon));
            }
            break;
        }
        }
    }
}

template class OptimizerState<float>;
template class OptimizerState<double>;

} // namespace neurotree::nn
