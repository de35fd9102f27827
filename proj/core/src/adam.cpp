#include "moire/adam.hpp"

#include <cmath>

#include "moire/errors.hpp"

namespace moire::nn {

template <typename T>
void adam_step(std::span<const ParamRef<T>> params, AdamState& state, const AdamHyper& hyper) {
    for (const auto& p : params) {
        if (!p.tensor->has_grad())
            throw ConfigError("adam_step: parameter block '" + p.name + "' has no gradient buffer");
        auto g = p.tensor->grad();
        for (std::size_t i = 0; i < g.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NumericalError("adam_step: non-finite gradient in parameter block '" + p.name +
                                     "' at flat index " + std::to_string(i) + " (value " +
                                     std::to_string(static_cast<double>(g[i])) + ")");
        }
    }

    if (state.m.empty()) {
        state.m.resize(params.size());
        state.v.resize(params.size());
        for (std::size_t b = 0; b < params.size(); ++b) {
            state.m[b].assign(params[b].tensor->size(), 0.0);
            state.v[b].assign(params[b].tensor->size(), 0.0);
        }
    }
    if (state.m.size() != params.size())
        throw ShapeError("adam_step: optimizer state has " + std::to_string(state.m.size()) +
                         " blocks, parameters have " + std::to_string(params.size()));
    for (std::size_t b = 0; b < params.size(); ++b)
        if (state.m[b].size() != params[b].tensor->size() ||
            state.v[b].size() != params[b].tensor->size())
            throw ShapeError("adam_step: moment buffer shape mismatch for block '" + params[b].name +
                             "'");

    ++state.step;
    const double t = static_cast<double>(state.step);
    const double correction1 = 1.0 - std::pow(hyper.beta1, t);
    const double correction2 = 1.0 - std::pow(hyper.beta2, t);

    for (std::size_t b = 0; b < params.size(); ++b) {
        auto w = params[b].tensor->data();
        auto g = params[b].tensor->grad();
        auto& m = state.m[b];
        auto& v = state.v[b];
        for (std::size_t i = 0; i < w.size(); ++i) {
            const double grad = static_cast<double>(g[i]) + hyper.weight_decay * static_cast<double>(w[i]);
            m[i] = hyper.beta1 * m[i] + (1.0 - hyper.beta1) * grad;
            v[i] = hyper.beta2 * v[i] + (1.0 - hyper.beta2) * grad * grad;
            const double m_hat = m[i] / correction1;
            const double v_hat = v[i] / correction2;
            w[i] = static_cast<T>(static_cast<double>(w[i]) -
                                  hyper.lr * m_hat / (std::sqrt(v_hat) + hyper.epsilon));
        }
    }
}

template void adam_step<float>(std::span<const ParamRef<float>>, AdamState&, const AdamHyper&);
template void adam_step<double>(std::span<const ParamRef<double>>, AdamState&, const AdamHyper&);

}  // namespace moire::nn
