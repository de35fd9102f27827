#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "moire/tensor.hpp"

namespace moire::nn {

struct AdamHyper {
    double lr = 1e-4;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    /// Coupled L2 decay: `weight_decay * param` is added to the gradient before the moments.
    double weight_decay = 1e-5;
};

/// A named parameter tensor whose gradient buffer the optimizer consumes.
template <typename T>
struct ParamRef {
    std::string name;
    Tensor4<T>* tensor;
};

/// First and second moment buffers, one pair per parameter block.
struct AdamState {
    std::vector<std::vector<double>> m;
    std::vector<std::vector<double>> v;
    std::size_t step = 0;
};

/// Single Adam update with bias correction over every parameter block.
///
/// Moments are kept in double precision regardless of the parameter type. Throws
/// NumericalError naming the block if any gradient entry is non-finite; in that case no
/// parameter is modified.
template <typename T>
void adam_step(std::span<const ParamRef<T>> params, AdamState& state, const AdamHyper& hyper);

}  // namespace moire::nn
