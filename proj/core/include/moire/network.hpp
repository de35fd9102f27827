#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "moire/adam.hpp"
#include "moire/layers.hpp"
#include "moire/tensor.hpp"

namespace moire::nn {

enum class Fusion { sum, concatenate };

/// Published architecture variants. `standard` is the full five-branch sum-fusion network.
enum class Variant { standard, v_concate, v_skip, v_c32, v_b123, v_b135, v_b15 };

Variant parse_variant(std::string_view name);
std::string_view variant_name(Variant v) noexcept;
std::vector<Variant> all_variants();

/// Declarative architecture description.
///
/// Channel widths follow the two-width layout of the downsampling and upsampling tables:
/// `base_channels` (32) for the early scale-1/2 layers, the last deconvolutions and the fusion
/// convolutions, and `cascade_channels` (64) everywhere else. `narrow_channels` collapses the
/// wide layers to `base_channels`.
struct NetworkConfig {
    std::vector<int> branches{1, 2, 3, 4, 5};
    std::size_t cascade_depth = 5;
    std::size_t cascade_channels = 64;
    std::size_t base_channels = 32;
    Fusion fusion = Fusion::sum;
    bool skip_in_branch = false;
    std::size_t input_channels = 3;
    bool narrow_channels = false;

    static NetworkConfig for_variant(Variant v);

    [[nodiscard]] int max_branch() const;
    [[nodiscard]] std::size_t wide_channels() const noexcept {
        return narrow_channels ? base_channels : cascade_channels;
    }
    /// Spatial dims must be divisible by this for every branch to be reachable.
    [[nodiscard]] std::size_t size_divisor() const { return std::size_t{1} << (max_branch() - 1); }
    [[nodiscard]] bool has_branch(int b) const;
    /// Throws ConfigError describing the first violated invariant.
    void validate() const;

    [[nodiscard]] std::map<std::string, std::string> to_kv() const;
    /// Reads the keys written by to_kv(); unknown keys are ignored, missing keys keep defaults.
    static NetworkConfig from_kv(const std::map<std::string, std::string>& kv);

    friend bool operator==(const NetworkConfig&, const NetworkConfig&) = default;
};

enum class LayerKind { conv, deconv };

struct LayerSpec {
    std::string name;
    LayerKind kind = LayerKind::conv;
    std::size_t in_c = 0;
    std::size_t out_c = 0;
    std::size_t kernel = 3;
    std::size_t stride = 1;
    std::size_t padding = 1;
    bool relu = true;

    [[nodiscard]] std::size_t parameter_count() const noexcept {
        return in_c * out_c * kernel * kernel + out_c;
    }
};

struct BranchPlan {
    int index = 1;
    std::vector<LayerSpec> cascade;
    /// Deconvolutions followed by the branch output layer (sum fusion), or the layers that
    /// produce the branch's contribution to the concatenation.
    std::vector<LayerSpec> upsample;
};

struct NetworkPlan {
    /// down[s-1] holds the two-layer group of scale s.
    std::vector<std::array<LayerSpec, 2>> down;
    std::vector<BranchPlan> branches;
    std::vector<LayerSpec> fusion;

    [[nodiscard]] std::vector<const LayerSpec*> layers() const;
};

NetworkPlan plan_network(const NetworkConfig& config);

/// Exact number of weights plus biases of build_network(config).
std::size_t param_count(const NetworkConfig& config);

template <typename T>
struct Layer {
    LayerSpec spec;
    ConvParams<T> params;
};

template <typename T>
struct Branch {
    int index = 1;
    std::vector<Layer<T>> cascade;
    std::vector<Layer<T>> upsample;
};

template <typename T>
struct Network {
    NetworkConfig config;
    std::uint64_t seed = 0;
    std::vector<std::array<Layer<T>, 2>> down;
    std::vector<Branch<T>> branches;
    std::vector<Layer<T>> fusion;

    /// Every layer in manifest order: downsampling groups, per-branch stacks, fusion.
    [[nodiscard]] std::vector<Layer<T>*> layers();
    [[nodiscard]] std::vector<const Layer<T>*> layers() const;
    /// Kernel and bias of every layer, in manifest order.
    [[nodiscard]] std::vector<ParamRef<T>> parameters();
    [[nodiscard]] std::size_t parameter_count() const;
    void zero_grad();
};

inline constexpr double kDefaultInitStd = 0.01;

/// `gaussian`: N(0, 0.01^2) weights. `fan_in`: N(0, g / fan_in) with g = 2 for layers followed by
/// a ReLU and 1 otherwise. `identity`: the gaussian draw, except that in every layer the first
/// input_channels output channels exactly copy the same input channels (centred deltas,
/// bilinear deconvolutions) and the output convolutions of branches 2-5 start at zero. A
/// sum-fusion network without in-branch skips then starts as the identity map on [0, 1] images.
enum class InitScheme { gaussian, fan_in, identity };

InitScheme parse_init_scheme(std::string_view name);
std::string_view init_scheme_name(InitScheme s) noexcept;

/// Instantiates the plan with N(0, init_std^2) weights and zero biases drawn from `seed`; a
/// negative init_std selects the fan-in scaled deviation per layer.
template <typename T>
Network<T> build_network(const NetworkConfig& config, std::uint64_t seed, double init_std = kDefaultInitStd);

template <typename T>
Network<T> build_network(const NetworkConfig& config, std::uint64_t seed, InitScheme scheme);

/// Per-branch full-resolution maps and their fusion.
///
/// In sum mode every map has `input_channels` channels and `fused` is their exact sum in
/// branch order. In concatenate mode the maps are the per-branch features that get stacked.
template <typename T>
struct BranchOutputs {
    std::vector<int> branch_ids;
    std::vector<Tensor4<T>> maps;
    Tensor4<T> fused;
};

/// Activations kept for the backward pass.
template <typename T>
struct ForwardCache {
    Tensor4<T> input;
    std::vector<std::array<Tensor4<T>, 2>> down;
    std::vector<std::vector<Tensor4<T>>> cascade;  // per branch, per cascade layer
    std::vector<Tensor4<T>> cascade_out;           // after the optional in-branch skip
    std::vector<std::vector<Tensor4<T>>> upsample;  // per branch, per upsample layer
    Tensor4<T> concat;
    std::vector<Tensor4<T>> fusion;
};

template <typename T>
struct ForwardResult {
    BranchOutputs<T> outputs;
    ForwardCache<T> cache;
};

/// Runs the network. Throws ShapeError if H or W is not divisible by config.size_divisor().
template <typename T>
ForwardResult<T> forward(const Network<T>& net, const Tensor4<T>& image);

/// Output-only forward pass that does not retain intermediate activations.
template <typename T>
BranchOutputs<T> infer(const Network<T>& net, const Tensor4<T>& image);

/// Accumulates parameter gradients of <grad_fused, fused> into each parameter's grad buffer.
template <typename T>
void backward(Network<T>& net, const ForwardResult<T>& result, const Tensor4<T>& grad_fused);

/// Copies parameters across scalar types (same config required).
template <typename To, typename From>
Network<To> network_cast(const Network<From>& src) {
    Network<To> out;
    out.config = src.config;
    out.seed = src.seed;
    auto cast_layer = [](const Layer<From>& l) {
        return Layer<To>{l.spec, ConvParams<To>{tensor_cast<To>(l.params.kernel),
                                                tensor_cast<To>(l.params.bias), l.params.stride,
                                                l.params.padding}};
    };
    for (const auto& group : src.down) out.down.push_back({cast_layer(group[0]), cast_layer(group[1])});
    for (const auto& b : src.branches) {
        Branch<To> nb;
        nb.index = b.index;
        for (const auto& l : b.cascade) nb.cascade.push_back(cast_layer(l));
        for (const auto& l : b.upsample) nb.upsample.push_back(cast_layer(l));
        out.branches.push_back(std::move(nb));
    }
    for (const auto& l : src.fusion) out.fusion.push_back(cast_layer(l));
    return out;
}

}  // namespace moire::nn
