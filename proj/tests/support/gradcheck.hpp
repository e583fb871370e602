#pragma once

#include "neurotree/nn/network.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace neurotree::testing {

struct GradCheckResult {
    double max_rel_error = 0.0;
    std::string worst;
    std::size_t checked = 0;
};

/// Central finite differences on a float64 build of `layers`. Every forward
/// reuses one rng seed, so dropout masks stay fixed across perturbations.
inline GradCheckResult gradient_check(const primitives::LayerTree& layers, const nn::Shape& input,
                                      std::size_t n_classes, std::uint64_t seed, std::size_t batch = 3,
                                      std::size_t max_per_tensor = 48)
{
    constexpr double kStep = 1e-5;
    constexpr double kFloor = 1e-6;
    nn::CompileOptions opts;
    opts.seed = seed;
    auto net = nn::compile<double>(layers, input, n_classes, opts);

    Rng data_rng(seed + 1);
    nn::Shape dims = input;
    dims.insert(dims.begin(), batch);
    nn::Tensor<double> x(dims);
    for (auto& v : x.values) {
        v = data_rng.normal();
    }
    std::vector<std::int32_t> y(batch);
    for (auto& l : y) {
        l = static_cast<std::int32_t>(data_rng.index(n_classes));
    }
    const std::uint64_t mask_seed = seed + 2;
    auto loss_at = [&] {
        Rng r(mask_seed);
        return net.loss(x, y, nn::Mode::Train, r);
    };

    nn::Tensor<double> dx;
    Rng r(mask_seed);
    net.loss_and_gradients(x, y, r, &dx);

    GradCheckResult result;
    auto check = [&](double analytic, double& slot, const std::string& label) {
        const double keep = slot;
        slot = keep + kStep;
        const double up = loss_at();
        slot = keep - kStep;
        const double down = loss_at();
        slot = keep;
        const double numeric = (up - down) / (2 * kStep);
        const double rel = std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), kFloor});
        ++result.checked;
        if (rel > result.max_rel_error) {
            result.max_rel_error = rel;
            result.worst = label + " analytic=" + std::to_string(analytic) + " numeric=" + std::to_string(numeric);
        }
    };

    auto params = net.parameters();
    std::vector<std::vector<double>> grads;
    for (auto* p : params) {
        grads.push_back(p->grad.values);
    }
    for (std::size_t pi = 0; pi < params.size(); ++pi) {
        const std::size_t n = params[pi]->value.size();
        const std::size_t stride = std::max<std::size_t>(1, n / max_per_tensor);
        for (std::size_t j = 0; j < n; j += stride) {
            check(grads[pi][j], params[pi]->value.values[j],
                  "param[" + std::to_string(pi) + "]." + params[pi]->name + "[" + std::to_string(j) + "]");
        }
    }
    const std::size_t stride = std::max<std::size_t>(1, x.size() / max_per_tensor);
    for (std::size_t j = 0; j < x.size(); j += stride) {
        check(dx[j], x.values[j], "input[" + std::to_string(j) + "]");
    }
    return result;
}

} // namespace neurotree::testing
