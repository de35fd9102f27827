#include "moire/inspect.hpp"

#include <algorithm>
#include <cmath>

#include "moire/errors.hpp"
#include "moire/image_io.hpp"

namespace moire::nn {

template <typename T>
std::vector<BranchVisual> inspect_branches(const Network<T>& net, const Tensor4<T>& input, double amplification) {
    if (!(amplification > 0.0)) throw ConfigError("inspect_branches: amplification must be positive");
    if (net.config.fusion != Fusion::sum)
        throw ConfigError("inspect_branches: branch maps are only images under sum fusion");
    const BranchOutputs<T> out = infer(net, input);
    std::vector<BranchVisual> visuals;
    for (std::size_t b = 0; b < out.maps.size(); ++b) {
        const Image map = from_tensor(out.maps[b], 0);
        BranchVisual v{out.branch_ids[b], map, map};
        for (double& x : v.raw.data()) x = std::clamp(x + 0.5, 0.0, 1.0);
        for (double& x : v.amplified.data()) x = std::clamp(amplification * x + 0.5, 0.0, 1.0);
        visuals.push_back(std::move(v));
    }
    return visuals;
}

std::vector<std::filesystem::path> write_branch_visuals(const std::vector<BranchVisual>& visuals,
                                                        const std::filesystem::path& dir, const std::string& stem) {
    std::filesystem::create_directories(dir);
    std::vector<std::filesystem::path> paths;
    for (const auto& v : visuals) {
        const std::string base = stem + "_branch" + std::to_string(v.branch);
        paths.push_back(dir / (base + "_raw.png"));
        io::write_image(v.raw, paths.back());
        paths.push_back(dir / (base + "_amp.png"));
        io::write_image(v.amplified, paths.back());
    }
    return paths;
}

template <typename T>
std::vector<double> branch_energy_ratios(const BranchOutputs<T>& outputs) {
    auto norm = [](const Tensor4<T>& t) {
        double s = 0.0;
        const T* p = t.sample(0);
        const std::size_t count = t.dims().c * t.dims().plane();
        for (std::size_t i = 0; i < count; ++i) s += static_cast<double>(p[i]) * static_cast<double>(p[i]);
        return std::sqrt(s);
    };
    const double fused = norm(outputs.fused);
    std::vector<double> ratios;
    for (const auto& m : outputs.maps) ratios.push_back(fused > 0.0 ? norm(m) / fused : 0.0);
    return ratios;
}

template std::vector<BranchVisual> inspect_branches<float>(const Network<float>&, const Tensor4<float>&, double);
template std::vector<BranchVisual> inspect_branches<double>(const Network<double>&, const Tensor4<double>&, double);
template std::vector<double> branch_energy_ratios<float>(const BranchOutputs<float>&);
template std::vector<double> branch_energy_ratios<double>(const BranchOutputs<double>&);

}  // namespace moire::nn
