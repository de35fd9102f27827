#pragma once

#include "moire/image.hpp"
#include "moire/network.hpp"

namespace moire {

/// Runs `net` on an image of any size: converts to the network's channel count, pads by edge
/// replication up to a multiple of the size divisor, crops the output back and clamps it to
/// [0, 1].
template <typename T>
Image restore(const nn::Network<T>& net, const Image& input);

/// `(size + divisor - 1) / divisor * divisor`.
std::size_t round_up(std::size_t size, std::size_t divisor);

}  // namespace moire
