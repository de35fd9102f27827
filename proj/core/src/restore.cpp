#include "moire/restore.hpp"

#include "moire/errors.hpp"

namespace moire {

std::size_t round_up(std::size_t size, std::size_t divisor) {
    if (divisor == 0) throw ConfigError("round_up: zero divisor");
    return (size + divisor - 1) / divisor * divisor;
}

template <typename T>
Image restore(const nn::Network<T>& net, const Image& input) {
    if (input.empty()) throw ShapeError("restore: empty image");
    const Image converted = convert_channels(input, net.config.input_channels);
    const std::size_t div = net.config.size_divisor();
    const Image padded =
        pad_replicate(converted, round_up(converted.height(), div), round_up(converted.width(), div));
    const auto out = nn::infer(net, to_tensor<T>(padded));
    return clamp01(crop(from_tensor(out.fused, 0), 0, 0, converted.width(), converted.height()));
}

template Image restore<float>(const nn::Network<float>&, const Image&);
template Image restore<double>(const nn::Network<double>&, const Image&);

}  // namespace moire
