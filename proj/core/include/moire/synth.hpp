#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "moire/dataset.hpp"
#include "moire/homography.hpp"
#include "moire/image.hpp"

namespace moire::synth {

enum class SensorPattern { bayer_rggb, plain };

/// One draw of the virtual screen/camera set-up.
///
/// Screen units are reference pixels; each is split into R, G, B vertical stripes with a dark
/// horizontal gap (`black_matrix` of its height). `view` maps centred camera-pixel coordinates
/// to centred screen coordinates; its scale is 1 / camera_sample_rate.
struct MoireParams {
    double screen_pixel_pitch = 1.0;
    double camera_sample_rate = 1.1;  // camera pixels per screen pixel
    double rotation = 0.0;            // radians, in-plane
    double perspective_x = 0.0;       // projective terms of the view map, per screen unit
    double perspective_y = 0.0;
    SensorPattern sensor = SensorPattern::bayer_rggb;
    double black_matrix = 0.2;
    double exposure = 1.0;            // global camera gain
    double strength = 1.0;            // 0 returns the reference unchanged
    int subsamples = 4;               // per camera pixel and axis (area sampling)

    /// The centred camera-to-screen homography implied by the scalar fields.
    [[nodiscard]] align::Homography view() const;
};

/// Ranges the generator draws MoireParams from.
struct SynthOptions {
    double min_rate = 0.78;
    double max_rate = 1.30;
    double min_rate_offset = 0.04;  // |rate - 1| is kept at least this large
    double max_rotation_deg = 8.0;
    double max_perspective = 4e-4;
    double min_strength = 0.35;
    double max_strength = 0.85;
    double bayer_probability = 0.7;
    double min_exposure = 0.85;
    double max_exposure = 1.15;
    double eta = 12.0;       // pairs below this PSNR are redrawn
    int max_attempts = 10;
    std::size_t pair_size = 64;  // square crop taken from each reference; 0 keeps full size
};

MoireParams draw_params(std::mt19937_64& rng, const SynthOptions& opt = {});

/// Renders `reference` on the virtual screen, photographs it, demosaics, and resamples the
/// photo back onto the reference grid. Output is pixel-aligned with the input and in [0, 1].
Image simulate_capture(const Image& reference, const MoireParams& params);

struct SimulatedPair {
    Image contaminated;
    MoireParams params;
    double psnr = 0.0;
    int attempts = 0;
};

/// Redraws parameters until PSNR(contaminated, reference) >= opt.eta; std::nullopt after
/// opt.max_attempts failures.
std::optional<SimulatedPair> simulate_pair(const Image& reference, std::mt19937_64& rng,
                                           const SynthOptions& opt = {});

/// Random colour image: smooth gradients, low-frequency waves, flat shapes and a little texture.
Image procedural_reference(std::size_t width, std::size_t height, std::mt19937_64& rng,
                           bool smooth_only = false);

struct SyntheticDataset {
    std::vector<DatasetPair> train;
    std::vector<DatasetPair> val;
    std::vector<DatasetPair> test;
};

/// Sizes of the 90/5/5 train/validation/test split of n pairs.
struct SplitSizes {
    std::size_t train, val, test;
};
SplitSizes split_sizes(std::size_t n);

/// Deterministic pairs from `references` (cycled, randomly cropped to opt.pair_size), split
/// 90/5/5 in generation order. Throws DataError for an empty reference list or when too many
/// references fail the PSNR floor.
SyntheticDataset make_dataset(std::span<const Image> references, std::size_t n_pairs,
                              std::uint64_t seed, const SynthOptions& opt = {});

/// `count` procedural references of the given size, derived from `seed`.
std::vector<Image> procedural_references(std::size_t count, std::size_t size, std::uint64_t seed);

/// Every PNG/PPM/PGM in `dir`, sorted by filename. Throws DataError if there are none.
std::vector<Image> load_reference_dir(const std::filesystem::path& dir);

/// Writes images under `dir/pairs/` and the train.tsv / val.tsv / test.tsv pair manifests.
void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir);

}  // namespace moire::synth
