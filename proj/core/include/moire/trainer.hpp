#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "moire/adam.hpp"
#include "moire/config.hpp"
#include "moire/dataset.hpp"
#include "moire/network.hpp"

namespace moire::train {

struct TrainConfig {
    std::size_t patch_size = 256;
    std::size_t batch_size = 8;
    double lr = 1e-4;
    double weight_decay = 1e-5;
    double lr_decay_factor = 10.0;
    std::size_t plateau_patience = 3;
    std::size_t max_epochs = 30;
    double min_lr = 1e-7;  // training stops once the decayed rate falls below this
    std::uint64_t seed = 0;
    /// Divide the loss by the pixel count of a patch as well as by the batch size.
    bool per_pixel_loss = false;

    /// Throws ConfigError if the patch size is not a multiple of net.size_divisor() or any
    /// count/rate is out of range.
    void validate(const nn::NetworkConfig& net) const;

    [[nodiscard]] KeyValues to_kv() const;
    static TrainConfig from_kv(const KeyValues& kv);
};

struct LossReport {
    std::size_t epoch = 0;
    double train_loss = 0.0;  // mean batch loss over the epoch
    double val_loss = 0.0;
    double lr = 0.0;          // rate used during the epoch
};

template <typename T>
struct PatchLoss {
    double loss = 0.0;
    nn::Tensor4<T> grad;
};

/// loss = (1/N) * sum_i ||S_i - T_i||^2 over the N batch items, grad = (2/N)(S - T).
/// With `per_pixel` both are further divided by c*h*w. Throws ShapeError on a dims mismatch.
template <typename T>
PatchLoss<T> l2_patch_loss(const nn::Tensor4<T>& pred, const nn::Tensor4<T>& target, bool per_pixel = false);

struct PatchPair {
    Image input;
    Image target;
};

/// Same uniformly placed p x p window from both images. Returns std::nullopt and writes a
/// warning to `warn` (if non-null) when the pair is smaller than p.
std::optional<PatchPair> sample_patches(const DatasetPair& pair, std::size_t p, std::mt19937_64& rng,
                                        std::ostream* warn = nullptr);

/// Centred p x p window, used for validation so its loss is deterministic.
std::optional<PatchPair> center_patches(const DatasetPair& pair, std::size_t p);

/// Divides the rate by `factor` after `patience` consecutive observations with no new minimum.
class PlateauSchedule {
public:
    PlateauSchedule(double lr, double factor, std::size_t patience);

    /// Records one validation loss; returns true if the rate was decayed.
    bool observe(double val_loss);
    [[nodiscard]] double lr() const noexcept { return lr_; }
    [[nodiscard]] double best() const noexcept { return best_; }
    [[nodiscard]] std::size_t stale_epochs() const noexcept { return stale_; }

private:
    double lr_;
    double factor_;
    std::size_t patience_;
    double best_;
    std::size_t stale_ = 0;
};

struct TrainHooks {
    std::function<void(const LossReport&)> on_epoch;
    /// Replaces the computed validation loss of an epoch (1-based).
    std::function<double(std::size_t epoch, double computed)> validation_override;
    /// Best-validation network is written here whenever it improves.
    std::optional<std::filesystem::path> checkpoint;
    /// Where the last finite network goes on divergence; defaults to `<checkpoint>.last_good`.
    std::optional<std::filesystem::path> last_good;
    /// One line per epoch: `epoch=<e> train_loss=<l> val_loss=<v> lr=<r>`.
    std::ostream* log = nullptr;
    std::ostream* warn = nullptr;
};

template <typename T>
struct TrainResult {
    nn::Network<T> best;
    std::vector<LossReport> history;
    std::size_t best_epoch = 0;
    double best_val_loss = 0.0;
    std::size_t steps = 0;
    std::string stop_reason;
};

/// One forward/backward/Adam update on a stacked batch; returns the batch loss.
template <typename T>
double train_step(nn::Network<T>& net, nn::AdamState& state, const nn::AdamHyper& hyper,
                  const nn::Tensor4<T>& inputs, const nn::Tensor4<T>& targets, bool per_pixel = false);

/// Mean per-patch loss of centred crops, evaluated in batches of `batch_size`.
template <typename T>
double evaluate_loss(const nn::Network<T>& net, std::span<const DatasetPair> pairs, std::size_t patch,
                     std::size_t batch_size, bool per_pixel = false);

/// Trains with Adam and the plateau schedule and returns the best-validation network.
///
/// Each epoch makes ceil(#pairs / batch) updates over a shuffled pair order with random crops.
/// Stops after max_epochs or once the rate drops below min_lr. With an empty validation set
/// the training loss drives the schedule. Throws DataError for an empty training set or ids
/// shared between the sets, and NumericalError (after dumping the last finite network) when
/// the loss or a gradient stops being finite.
template <typename T>
TrainResult<T> train(nn::Network<T> net, std::span<const DatasetPair> train_set,
                     std::span<const DatasetPair> val_set, const TrainConfig& cfg, const TrainHooks& hooks = {});

}  // namespace moire::train
