#pragma once

#include <filesystem>
#include <vector>

#include "moire/image.hpp"
#include "moire/network.hpp"

namespace moire::nn {

struct BranchVisual {
    int branch = 1;
    Image raw;        // clamp(map + 0.5)
    Image amplified;  // clamp(amplification * map + 0.5)
};

/// Per-branch maps of a sum-fusion network for the first image of `input`. Throws ConfigError
/// for concatenate fusion or a non-positive amplification.
template <typename T>
std::vector<BranchVisual> inspect_branches(const Network<T>& net, const Tensor4<T>& input, double amplification);

/// Writes `<stem>_branch<i>_raw.png` and `<stem>_branch<i>_amp.png`; returns the paths.
std::vector<std::filesystem::path> write_branch_visuals(const std::vector<BranchVisual>& visuals,
                                                        const std::filesystem::path& dir, const std::string& stem);

/// ||map_b|| / ||fused|| for each branch of the first image (L2 over all pixels and channels).
template <typename T>
std::vector<double> branch_energy_ratios(const BranchOutputs<T>& outputs);

}  // namespace moire::nn
