#include "moire/network.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "moire/errors.hpp"

namespace moire::nn {
namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 7> kVariantNames{{
    {Variant::standard, "default"},
    {Variant::v_concate, "v_concate"},
    {Variant::v_skip, "v_skip"},
    {Variant::v_c32, "v_c32"},
    {Variant::v_b123, "v_b123"},
    {Variant::v_b135, "v_b135"},
    {Variant::v_b15, "v_b15"},
}};

LayerSpec conv_spec(std::string name, std::size_t in_c, std::size_t out_c, std::size_t stride = 1,
                    bool relu = true, std::size_t kernel = 3) {
    return {std::move(name), LayerKind::conv, in_c, out_c, kernel, stride, kernel / 2, relu};
}

LayerSpec deconv_spec(std::string name, std::size_t in_c, std::size_t out_c) {
    return {std::move(name), LayerKind::deconv, in_c, out_c, 4, 2, 1, true};
}

// sqrt(gain / fan_in): gain 2 before a ReLU, 1 otherwise. A stride-s transposed convolution
// sees in_c * k^2 / s^2 inputs per output.
double fan_in_std(const LayerSpec& spec) {
    double fan_in = static_cast<double>(spec.in_c * spec.kernel * spec.kernel);
    if (spec.kind == LayerKind::deconv) fan_in /= static_cast<double>(spec.stride * spec.stride);
    return std::sqrt((spec.relu ? 2.0 : 1.0) / fan_in);
}

template <typename T>
Layer<T> instantiate(const LayerSpec& spec, std::mt19937_64& rng, double init_std) {
    Layer<T> layer{spec, spec.kind == LayerKind::conv
                             ? make_conv<T>(spec.in_c, spec.out_c, spec.kernel, spec.stride, spec.padding)
                             : make_deconv<T>(spec.in_c, spec.out_c, spec.kernel, spec.stride,
                                              spec.padding)};
    if (init_std < 0.0) init_std = fan_in_std(spec);
    std::normal_distribution<double> gauss(0.0, init_std);
    for (T& w : layer.params.kernel.data()) w = static_cast<T>(gauss(rng));
    return layer;
}

template <typename T>
Tensor4<T> run_layer(const Layer<T>& layer, const Tensor4<T>& x) {
    Tensor4<T> y = layer.spec.kind == LayerKind::conv ? conv2d_forward(x, layer.params)
                                                      : deconv2d_forward(x, layer.params);
    if (layer.spec.relu) relu_inplace(y);
    return y;
}

template <typename T>
void accumulate(std::span<T> dst, std::span<const T> src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

// Backpropagates `grad_y` (consumed) through one layer, accumulating parameter gradients.
template <typename T>
Tensor4<T> back_layer(Layer<T>& layer, const Tensor4<T>& x, const Tensor4<T>& y, Tensor4<T>&& grad_y,
                      bool want_input) {
    if (layer.spec.relu) relu_backward_inplace(y, grad_y);
    ConvGrads<T> g = layer.spec.kind == LayerKind::conv
                         ? conv2d_backward(x, layer.params, grad_y, want_input)
                         : deconv2d_backward(x, layer.params, grad_y, want_input);
    accumulate<T>(layer.params.kernel.ensure_grad(), g.kernel.data());
    accumulate<T>(layer.params.bias.ensure_grad(), g.bias.data());
    return std::move(g.input);
}

// Adds the first min(channels) channels of `src` onto `dst`.
template <typename T>
void add_channels(Tensor4<T>& dst, const Tensor4<T>& src) {
    const Dims& d = dst.dims();
    const std::size_t c = std::min(d.c, src.dims().c);
    for (std::size_t n = 0; n < d.n; ++n)
        for (std::size_t k = 0; k < c; ++k) {
            T* p = dst.plane(n, k);
            const T* q = src.plane(n, k);
            for (std::size_t i = 0; i < d.plane(); ++i) p[i] += q[i];
        }
}

template <typename T>
Tensor4<T> concat_channels(const std::vector<Tensor4<T>>& parts) {
    const Dims& first = parts.front().dims();
    std::size_t channels = 0;
    for (const auto& p : parts) channels += p.dims().c;
    Tensor4<T> out(first.n, channels, first.h, first.w);
    for (std::size_t n = 0; n < first.n; ++n) {
        std::size_t offset = 0;
        for (const auto& p : parts) {
            std::copy(p.sample(n), p.sample(n) + p.dims().c * first.plane(), out.plane(n, offset));
            offset += p.dims().c;
        }
    }
    return out;
}

template <typename T>
Tensor4<T> slice_channels(const Tensor4<T>& src, std::size_t begin, std::size_t count) {
    const Dims& d = src.dims();
    Tensor4<T> out(d.n, count, d.h, d.w);
    for (std::size_t n = 0; n < d.n; ++n)
        std::copy(src.plane(n, begin), src.plane(n, begin) + count * d.plane(), out.sample(n));
    return out;
}

template <typename T>
void check_input(const Network<T>& net, const Tensor4<T>& image) {
    const Dims& d = image.dims();
    if (d.c != net.config.input_channels)
        throw ShapeError("forward: channel axis mismatch, network expects " +
                         std::to_string(net.config.input_channels) + " channels, image has " +
                         std::to_string(d.c));
    const std::size_t div = net.config.size_divisor();
    if (d.h == 0 || d.w == 0 || d.h % div != 0 || d.w % div != 0)
        throw ShapeError("forward: image " + std::to_string(d.h) + "x" + std::to_string(d.w) +
                         " must have height and width divisible by " + std::to_string(div) +
                         " for a network whose deepest branch is " +
                         std::to_string(net.config.max_branch()));
}

template <typename T>
ForwardResult<T> run_forward(const Network<T>& net, const Tensor4<T>& image, bool keep) {
    check_input(net, image);
    ForwardResult<T> r;
    ForwardCache<T>& cache = r.cache;

    const Tensor4<T>* x = &image;
    cache.down.resize(net.down.size());
    for (std::size_t s = 0; s < net.down.size(); ++s) {
        cache.down[s][0] = run_layer(net.down[s][0], *x);
        cache.down[s][1] = run_layer(net.down[s][1], cache.down[s][0]);
        x = &cache.down[s][1];
    }

    const std::size_t nb = net.branches.size();
    cache.cascade.resize(nb);
    cache.cascade_out.resize(nb);
    cache.upsample.resize(nb);
    for (std::size_t b = 0; b < nb; ++b) {
        const Branch<T>& branch = net.branches[b];
        const Tensor4<T>& source = cache.down[branch.index - 1][1];
        const Tensor4<T>* h = &source;
        for (const auto& layer : branch.cascade) {
            cache.cascade[b].push_back(run_layer(layer, *h));
            h = &cache.cascade[b].back();
        }
        cache.cascade_out[b] = *h;
        if (net.config.skip_in_branch) add_channels(cache.cascade_out[b], source);
        h = &cache.cascade_out[b];
        for (const auto& layer : branch.upsample) {
            cache.upsample[b].push_back(run_layer(layer, *h));
            h = &cache.upsample[b].back();
        }
        r.outputs.branch_ids.push_back(branch.index);
        r.outputs.maps.push_back(*h);
    }

    if (net.config.fusion == Fusion::sum) {
        r.outputs.fused = r.outputs.maps.front();
        for (std::size_t b = 1; b < nb; ++b)
            accumulate<T>(r.outputs.fused.data(), r.outputs.maps[b].data());
    } else {
        cache.concat = concat_channels(r.outputs.maps);
        const Tensor4<T>* h = &cache.concat;
        for (const auto& layer : net.fusion) {
            cache.fusion.push_back(run_layer(layer, *h));
            h = &cache.fusion.back();
        }
        r.outputs.fused = *h;
    }
    if (!keep) r.cache = ForwardCache<T>{};
    else cache.input = image;
    return r;
}

}  // namespace

InitScheme parse_init_scheme(std::string_view name) {
    if (name == "gaussian") return InitScheme::gaussian;
    if (name == "fan_in") return InitScheme::fan_in;
    if (name == "identity") return InitScheme::identity;
    throw ConfigError("unknown init scheme '" + std::string(name) + "' (expected gaussian, fan_in or identity)");
}

std::string_view init_scheme_name(InitScheme s) noexcept {
    switch (s) {
        case InitScheme::fan_in: return "fan_in";
        case InitScheme::identity: return "identity";
        default: return "gaussian";
    }
}

Variant parse_variant(std::string_view name) {
    for (const auto& [v, n] : kVariantNames)
        if (n == name) return v;
    if (name == "standard") return Variant::standard;
    throw ConfigError("unknown variant '" + std::string(name) +
                      "' (expected default, v_concate, v_skip, v_c32, v_b123, v_b135 or v_b15)");
}

std::string_view variant_name(Variant v) noexcept {
    for (const auto& [variant, n] : kVariantNames)
        if (variant == v) return n;
    return "default";
}

std::vector<Variant> all_variants() {
    std::vector<Variant> out;
    for (const auto& [v, n] : kVariantNames) out.push_back(v);
    return out;
}

NetworkConfig NetworkConfig::for_variant(Variant v) {
    NetworkConfig c;
    switch (v) {
        case Variant::standard: break;
        case Variant::v_concate: c.fusion = Fusion::concatenate; break;
        case Variant::v_skip: c.skip_in_branch = true; break;
        case Variant::v_c32: c.narrow_channels = true; break;
        case Variant::v_b123: c.branches = {1, 2, 3}; break;
        case Variant::v_b135: c.branches = {1, 3, 5}; break;
        case Variant::v_b15: c.branches = {1, 5}; break;
    }
    return c;
}

int NetworkConfig::max_branch() const {
    return branches.empty() ? 1 : *std::max_element(branches.begin(), branches.end());
}

bool NetworkConfig::has_branch(int b) const {
    return std::find(branches.begin(), branches.end(), b) != branches.end();
}

void NetworkConfig::validate() const {
    if (branches.empty()) throw ConfigError("network config: branch set is empty");
    if (!std::is_sorted(branches.begin(), branches.end()) ||
        std::adjacent_find(branches.begin(), branches.end()) != branches.end())
        throw ConfigError("network config: branches must be strictly increasing");
    for (int b : branches)
        if (b < 1 || b > 5)
            throw ConfigError("network config: branch " + std::to_string(b) + " outside 1..5");
    if (branches.front() != 1)
        throw ConfigError("network config: branch 1 must be present (it carries full-resolution colour)");
    if (cascade_depth < 1) throw ConfigError("network config: cascade_depth must be >= 1");
    if (cascade_channels < 1 || base_channels < 1)
        throw ConfigError("network config: channel widths must be positive");
    if (input_channels != 1 && input_channels != 3)
        throw ConfigError("network config: input_channels must be 1 or 3");
}

std::map<std::string, std::string> NetworkConfig::to_kv() const {
    std::ostringstream bs;
    for (std::size_t i = 0; i < branches.size(); ++i) bs << (i ? "," : "") << branches[i];
    return {
        {"branches", bs.str()},
        {"cascade_depth", std::to_string(cascade_depth)},
        {"cascade_channels", std::to_string(cascade_channels)},
        {"base_channels", std::to_string(base_channels)},
        {"fusion", fusion == Fusion::sum ? "sum" : "concatenate"},
        {"skip_in_branch", skip_in_branch ? "1" : "0"},
        {"input_channels", std::to_string(input_channels)},
        {"narrow_channels", narrow_channels ? "1" : "0"},
    };
}

NetworkConfig NetworkConfig::from_kv(const std::map<std::string, std::string>& kv) {
    NetworkConfig c;
    auto get = [&](const char* key) -> const std::string* {
        auto it = kv.find(key);
        return it == kv.end() ? nullptr : &it->second;
    };
    auto to_size = [](const std::string& key, const std::string& v) {
        try {
            std::size_t pos = 0;
            const unsigned long long r = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument(v);
            return static_cast<std::size_t>(r);
        } catch (const std::exception&) {
            throw ConfigError("network config: '" + key + "' expects a non-negative integer, got '" +
                              v + "'");
        }
    };
    auto to_bool = [](const std::string& key, const std::string& v) {
        if (v == "1" || v == "true" || v == "yes") return true;
        if (v == "0" || v == "false" || v == "no") return false;
        throw ConfigError("network config: '" + key + "' expects a boolean, got '" + v + "'");
    };
    if (auto v = get("branches")) {
        c.branches.clear();
        std::stringstream ss(*v);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (!tok.empty()) c.branches.push_back(static_cast<int>(to_size("branches", tok)));
    }
    if (auto v = get("cascade_depth")) c.cascade_depth = to_size("cascade_depth", *v);
    if (auto v = get("cascade_channels")) c.cascade_channels = to_size("cascade_channels", *v);
    if (auto v = get("base_channels")) c.base_channels = to_size("base_channels", *v);
    if (auto v = get("fusion")) {
        if (*v == "sum") c.fusion = Fusion::sum;
        else if (*v == "concatenate" || *v == "concat") c.fusion = Fusion::concatenate;
        else throw ConfigError("network config: fusion must be 'sum' or 'concatenate'");
    }
    if (auto v = get("skip_in_branch")) c.skip_in_branch = to_bool("skip_in_branch", *v);
    if (auto v = get("input_channels")) c.input_channels = to_size("input_channels", *v);
    if (auto v = get("narrow_channels")) c.narrow_channels = to_bool("narrow_channels", *v);
    return c;
}

std::vector<const LayerSpec*> NetworkPlan::layers() const {
    std::vector<const LayerSpec*> out;
    for (const auto& group : down) {
        out.push_back(&group[0]);
        out.push_back(&group[1]);
    }
    for (const auto& b : branches) {
        for (const auto& l : b.cascade) out.push_back(&l);
        for (const auto& l : b.upsample) out.push_back(&l);
    }
    for (const auto& l : fusion) out.push_back(&l);
    return out;
}

NetworkPlan plan_network(const NetworkConfig& config) {
    config.validate();
    const std::size_t narrow = config.base_channels;
    const std::size_t wide = config.wide_channels();
    const std::size_t out_c = config.input_channels;
    const bool concat = config.fusion == Fusion::concatenate;

    NetworkPlan plan;
    for (int s = 1; s <= config.max_branch(); ++s) {
        const std::string p = "down" + std::to_string(s) + ".";
        if (s == 1)
            plan.down.push_back({conv_spec(p + "0", out_c, narrow), conv_spec(p + "1", narrow, narrow)});
        else if (s == 2)
            plan.down.push_back({conv_spec(p + "0", narrow, narrow, 2), conv_spec(p + "1", narrow, wide)});
        else
            plan.down.push_back({conv_spec(p + "0", wide, wide, 2), conv_spec(p + "1", wide, wide)});
    }

    for (int i : config.branches) {
        BranchPlan b;
        b.index = i;
        const std::string p = "branch" + std::to_string(i) + ".";
        std::size_t c = plan.down[i - 1][1].out_c;
        for (std::size_t d = 0; d < config.cascade_depth; ++d) {
            b.cascade.push_back(conv_spec(p + "cascade" + std::to_string(d), c, wide));
            c = wide;
        }
        for (int j = 0; j < i - 1; ++j) {
            const std::size_t next = (j == 0 && i >= 3) ? wide : narrow;
            b.upsample.push_back(deconv_spec(p + "up" + std::to_string(j), c, next));
            c = next;
        }
        if (!concat) b.upsample.push_back(conv_spec(p + "out", c, out_c, 1, false));
        else if (i == 1) b.upsample.push_back(conv_spec(p + "reduce", c, narrow, 1, true, 1));
        plan.branches.push_back(std::move(b));
    }

    if (concat) {
        const std::size_t stacked = narrow * config.branches.size();
        plan.fusion.push_back(conv_spec("fusion.0", stacked, narrow));
        plan.fusion.push_back(conv_spec("fusion.1", narrow, narrow));
        plan.fusion.push_back(conv_spec("fusion.out", narrow, out_c, 1, false));
    }
    return plan;
}

std::size_t param_count(const NetworkConfig& config) {
    std::size_t total = 0;
    for (const LayerSpec* l : plan_network(config).layers()) total += l->parameter_count();
    return total;
}

template <typename T>
std::vector<Layer<T>*> Network<T>::layers() {
    std::vector<Layer<T>*> out;
    for (auto& group : down) {
        out.push_back(&group[0]);
        out.push_back(&group[1]);
    }
    for (auto& b : branches) {
        for (auto& l : b.cascade) out.push_back(&l);
        for (auto& l : b.upsample) out.push_back(&l);
    }
    for (auto& l : fusion) out.push_back(&l);
    return out;
}

template <typename T>
std::vector<const Layer<T>*> Network<T>::layers() const {
    std::vector<const Layer<T>*> out;
    for (Layer<T>* l : const_cast<Network<T>*>(this)->layers()) out.push_back(l);
    return out;
}

template <typename T>
std::vector<ParamRef<T>> Network<T>::parameters() {
    std::vector<ParamRef<T>> out;
    for (Layer<T>* l : layers()) {
        out.push_back({l->spec.name + ".weight", &l->params.kernel});
        out.push_back({l->spec.name + ".bias", &l->params.bias});
    }
    return out;
}

template <typename T>
std::size_t Network<T>::parameter_count() const {
    std::size_t total = 0;
    for (const Layer<T>* l : layers()) total += l->params.parameter_count();
    return total;
}

template <typename T>
void Network<T>::zero_grad() {
    for (Layer<T>* l : layers()) {
        l->params.kernel.ensure_grad();
        l->params.kernel.zero_grad();
        l->params.bias.ensure_grad();
        l->params.bias.zero_grad();
    }
}

template <typename T>
Network<T> build_network(const NetworkConfig& config, std::uint64_t seed, double init_std) {
    const NetworkPlan plan = plan_network(config);
    std::mt19937_64 rng(seed);
    Network<T> net;
    net.config = config;
    net.seed = seed;
    for (const auto& group : plan.down)
        net.down.push_back({instantiate<T>(group[0], rng, init_std), instantiate<T>(group[1], rng, init_std)});
    for (const auto& bp : plan.branches) {
        Branch<T> b;
        b.index = bp.index;
        for (const auto& l : bp.cascade) b.cascade.push_back(instantiate<T>(l, rng, init_std));
        for (const auto& l : bp.upsample) b.upsample.push_back(instantiate<T>(l, rng, init_std));
        net.branches.push_back(std::move(b));
    }
    for (const auto& l : plan.fusion) net.fusion.push_back(instantiate<T>(l, rng, init_std));
    return net;
}

// Makes the first `channels` feature channels of a layer a pass-through of the same input
// channels: a centred delta for convolutions, bilinear interpolation weights for stride-2
// deconvolutions. Their other weights are zeroed.
template <typename T>
void add_identity(Layer<T>& layer, std::size_t channels) {
    const LayerSpec& s = layer.spec;
    const std::size_t n = std::min({channels, s.in_c, s.out_c});
    Tensor4<T>& k = layer.params.kernel;
    for (std::size_t c = 0; c < n; ++c) {
        if (s.kind == LayerKind::conv) {
            for (std::size_t i = 0; i < s.in_c; ++i)
                for (std::size_t y = 0; y < s.kernel; ++y)
                    for (std::size_t x = 0; x < s.kernel; ++x) k(c, i, y, x) = T(0);
            k(c, c, s.padding, s.padding) = T(1);
            continue;
        }
        for (std::size_t o = 0; o < s.out_c; ++o)
            for (std::size_t y = 0; y < s.kernel; ++y)
                for (std::size_t x = 0; x < s.kernel; ++x) k(c, o, y, x) = T(0);
        for (std::size_t i = 0; i < s.kernel; ++i)
            for (std::size_t j = 0; j < s.kernel; ++j) {
                auto tap = [&](std::size_t t) {
                    const double centre = (static_cast<double>(s.kernel) - 1.0) / 2.0;
                    return 1.0 - std::abs(static_cast<double>(t) - centre) / static_cast<double>(s.stride);
                };
                k(c, c, i, j) = static_cast<T>(tap(i) * tap(j));
            }
    }
}

template <typename T>
Network<T> build_network(const NetworkConfig& config, std::uint64_t seed, InitScheme scheme) {
    if (scheme == InitScheme::fan_in) return build_network<T>(config, seed, -1.0);
    Network<T> net = build_network<T>(config, seed, kDefaultInitStd);
    if (scheme == InitScheme::gaussian) return net;
    const std::size_t ch = config.input_channels;
    for (auto& group : net.down)
        for (auto& l : group) add_identity(l, ch);
    for (auto& b : net.branches) {
        for (auto& l : b.cascade) add_identity(l, ch);
        for (auto& l : b.upsample) {
            if (l.spec.relu || l.spec.kind == LayerKind::deconv || b.index == 1) add_identity(l, ch);
            else l.params.kernel.fill(T(0));
        }
    }
    for (auto& l : net.fusion) add_identity(l, ch);
    return net;
}

template <typename T>
ForwardResult<T> forward(const Network<T>& net, const Tensor4<T>& image) {
    return run_forward(net, image, true);
}

template <typename T>
BranchOutputs<T> infer(const Network<T>& net, const Tensor4<T>& image) {
    return run_forward(net, image, false).outputs;
}

template <typename T>
void backward(Network<T>& net, const ForwardResult<T>& result, const Tensor4<T>& grad_fused) {
    require_same_dims(grad_fused.dims(), result.outputs.fused.dims(), "backward grad_fused");
    const ForwardCache<T>& cache = result.cache;
    if (cache.down.size() != net.down.size())
        throw ShapeError("backward: forward cache does not belong to this network");
    const std::size_t nb = net.branches.size();

    // Gradient at each branch's final map.
    std::vector<Tensor4<T>> grad_maps(nb);
    if (net.config.fusion == Fusion::sum) {
        for (auto& g : grad_maps) g = grad_fused;
    } else {
        Tensor4<T> g = grad_fused;
        for (std::size_t k = net.fusion.size(); k-- > 0;) {
            const Tensor4<T>& x = k == 0 ? cache.concat : cache.fusion[k - 1];
            g = back_layer(net.fusion[k], x, cache.fusion[k], std::move(g), true);
        }
        std::size_t offset = 0;
        for (std::size_t b = 0; b < nb; ++b) {
            const std::size_t c = result.outputs.maps[b].dims().c;
            grad_maps[b] = slice_channels(g, offset, c);
            offset += c;
        }
    }

    // Gradient at the output of each downsampling group.
    std::vector<Tensor4<T>> grad_down(net.down.size());
    auto add_grad = [](Tensor4<T>& slot, Tensor4<T>&& g) {
        if (slot.empty()) slot = std::move(g);
        else accumulate<T>(slot.data(), std::as_const(g).data());
    };

    for (std::size_t b = 0; b < nb; ++b) {
        Branch<T>& branch = net.branches[b];
        const std::size_t s = static_cast<std::size_t>(branch.index - 1);
        const Tensor4<T>& source = cache.down[s][1];
        Tensor4<T> g = std::move(grad_maps[b]);
        for (std::size_t k = branch.upsample.size(); k-- > 0;) {
            const Tensor4<T>& x = k == 0 ? cache.cascade_out[b] : cache.upsample[b][k - 1];
            g = back_layer(branch.upsample[k], x, cache.upsample[b][k], std::move(g), true);
        }
        if (net.config.skip_in_branch) {
            Tensor4<T> skip(source.dims());
            add_channels(skip, g);
            add_grad(grad_down[s], std::move(skip));
        }
        for (std::size_t k = branch.cascade.size(); k-- > 0;) {
            const Tensor4<T>& x = k == 0 ? source : cache.cascade[b][k - 1];
            g = back_layer(branch.cascade[k], x, cache.cascade[b][k], std::move(g), true);
        }
        add_grad(grad_down[s], std::move(g));
    }

    for (std::size_t s = net.down.size(); s-- > 0;) {
        if (grad_down[s].empty()) continue;
        Tensor4<T> g = back_layer(net.down[s][1], cache.down[s][0], cache.down[s][1],
                                  std::move(grad_down[s]), true);
        const Tensor4<T>& x = s == 0 ? cache.input : cache.down[s - 1][1];
        g = back_layer(net.down[s][0], x, cache.down[s][0], std::move(g), s > 0);
        if (s > 0) add_grad(grad_down[s - 1], std::move(g));
    }
}

#define MOIRE_INSTANTIATE_NETWORK(T)                                                            \
    template struct Network<T>;                                                                 \
    template Network<T> build_network<T>(const NetworkConfig&, std::uint64_t, double);          \
    template Network<T> build_network<T>(const NetworkConfig&, std::uint64_t, InitScheme);      \
    template ForwardResult<T> forward<T>(const Network<T>&, const Tensor4<T>&);                 \
    template BranchOutputs<T> infer<T>(const Network<T>&, const Tensor4<T>&);                   \
    template void backward<T>(Network<T>&, const ForwardResult<T>&, const Tensor4<T>&);

MOIRE_INSTANTIATE_NETWORK(float)
MOIRE_INSTANTIATE_NETWORK(double)

#undef MOIRE_INSTANTIATE_NETWORK

}  // namespace moire::nn
