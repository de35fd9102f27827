#include "moire/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <set>

#include "moire/checkpoint.hpp"
#include "moire/errors.hpp"
#include "moire/random.hpp"

namespace moire::train {

void TrainConfig::validate(const nn::NetworkConfig& net) const {
    if (patch_size == 0 || patch_size % net.size_divisor() != 0)
        throw ConfigError("train config: patch_size " + std::to_string(patch_size) + " must be a positive multiple of " +
                          std::to_string(net.size_divisor()));
    if (batch_size < 1) throw ConfigError("train config: batch_size must be at least 1");
    if (!(lr >= 0.0) || !(weight_decay >= 0.0) || !(min_lr >= 0.0))
        throw ConfigError("train config: lr, weight_decay and min_lr must be non-negative");
    if (!(lr_decay_factor > 1.0)) throw ConfigError("train config: lr_decay_factor must exceed 1");
    if (plateau_patience < 1) throw ConfigError("train config: plateau_patience must be at least 1");
}

KeyValues TrainConfig::to_kv() const {
    return {{"patch_size", std::to_string(patch_size)},
            {"batch_size", std::to_string(batch_size)},
            {"lr", format_double(lr)},
            {"weight_decay", format_double(weight_decay)},
            {"lr_decay_factor", format_double(lr_decay_factor)},
            {"plateau_patience", std::to_string(plateau_patience)},
            {"max_epochs", std::to_string(max_epochs)},
            {"min_lr", format_double(min_lr)},
            {"seed", std::to_string(seed)},
            {"per_pixel_loss", per_pixel_loss ? "true" : "false"}};
}

TrainConfig TrainConfig::from_kv(const KeyValues& kv) {
    TrainConfig c;
    c.patch_size = kv_size(kv, "patch_size", c.patch_size);
    c.batch_size = kv_size(kv, "batch_size", c.batch_size);
    c.lr = kv_double(kv, "lr", c.lr);
    c.weight_decay = kv_double(kv, "weight_decay", c.weight_decay);
    c.lr_decay_factor = kv_double(kv, "lr_decay_factor", c.lr_decay_factor);
    c.plateau_patience = kv_size(kv, "plateau_patience", c.plateau_patience);
    c.max_epochs = kv_size(kv, "max_epochs", c.max_epochs);
    c.min_lr = kv_double(kv, "min_lr", c.min_lr);
    c.seed = kv_u64(kv, "seed", c.seed);
    c.per_pixel_loss = kv_bool(kv, "per_pixel_loss", c.per_pixel_loss);
    return c;
}

template <typename T>
PatchLoss<T> l2_patch_loss(const nn::Tensor4<T>& pred, const nn::Tensor4<T>& target, bool per_pixel) {
    nn::require_same_dims(pred.dims(), target.dims(), "l2_patch_loss");
    const nn::Dims d = pred.dims();
    if (d.n == 0) throw ShapeError("l2_patch_loss: empty batch");
    double norm = static_cast<double>(d.n);
    if (per_pixel) norm *= static_cast<double>(d.c * d.h * d.w);
    PatchLoss<T> out{0.0, nn::Tensor4<T>(d)};
    const auto s = pred.data();
    const auto t = target.data();
    auto g = out.grad.data();
    double sum = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const double diff = static_cast<double>(s[i]) - static_cast<double>(t[i]);
        sum += diff * diff;
        g[i] = static_cast<T>(2.0 * diff / norm);
    }
    out.loss = sum / norm;
    return out;
}

std::optional<PatchPair> sample_patches(const DatasetPair& pair, std::size_t p, std::mt19937_64& rng,
                                        std::ostream* warn) {
    require_same_shape(pair.contaminated, pair.reference, "sample_patches");
    const Image& a = pair.contaminated;
    if (a.width() < p || a.height() < p) {
        if (warn)
            *warn << "warning: skipping pair '" << pair.id << "' (" << a.width() << "x" << a.height()
                  << ") smaller than patch " << p << '\n';
        return std::nullopt;
    }
    const auto x0 = std::uniform_int_distribution<std::size_t>(0, a.width() - p)(rng);
    const auto y0 = std::uniform_int_distribution<std::size_t>(0, a.height() - p)(rng);
    return PatchPair{crop(a, x0, y0, p, p), crop(pair.reference, x0, y0, p, p)};
}

std::optional<PatchPair> center_patches(const DatasetPair& pair, std::size_t p) {
    require_same_shape(pair.contaminated, pair.reference, "center_patches");
    const Image& a = pair.contaminated;
    if (a.width() < p || a.height() < p) return std::nullopt;
    const std::size_t x0 = (a.width() - p) / 2, y0 = (a.height() - p) / 2;
    return PatchPair{crop(a, x0, y0, p, p), crop(pair.reference, x0, y0, p, p)};
}

PlateauSchedule::PlateauSchedule(double lr, double factor, std::size_t patience)
    : lr_(lr), factor_(factor), patience_(patience), best_(std::numeric_limits<double>::infinity()) {}

bool PlateauSchedule::observe(double val_loss) {
    if (val_loss < best_) {
        best_ = val_loss;
        stale_ = 0;
        return false;
    }
    if (++stale_ < patience_) return false;
    lr_ /= factor_;
    stale_ = 0;
    return true;
}

template <typename T>
double train_step(nn::Network<T>& net, nn::AdamState& state, const nn::AdamHyper& hyper,
                  const nn::Tensor4<T>& inputs, const nn::Tensor4<T>& targets, bool per_pixel) {
    net.zero_grad();
    const auto result = nn::forward(net, inputs);
    const PatchLoss<T> loss = l2_patch_loss(result.outputs.fused, targets, per_pixel);
    if (!std::isfinite(loss.loss)) throw NumericalError("training loss is not finite");
    nn::backward(net, result, loss.grad);
    const auto params = net.parameters();
    nn::adam_step<T>(params, state, hyper);
    return loss.loss;
}

namespace {

template <typename T>
std::pair<nn::Tensor4<T>, nn::Tensor4<T>> stack(const std::vector<PatchPair>& patches) {
    std::vector<Image> in, tg;
    in.reserve(patches.size());
    tg.reserve(patches.size());
    for (const auto& p : patches) {
        in.push_back(p.input);
        tg.push_back(p.target);
    }
    return {to_batch<T>(in), to_batch<T>(tg)};
}

template <typename T>
void drop_grads(nn::Network<T>& net) {
    for (const auto& p : net.parameters()) p.tensor->drop_grad();
}

}  // namespace

template <typename T>
double evaluate_loss(const nn::Network<T>& net, std::span<const DatasetPair> pairs, std::size_t patch,
                     std::size_t batch_size, bool per_pixel) {
    double total = 0.0;
    std::size_t count = 0;
    std::vector<PatchPair> batch;
    auto flush = [&] {
        if (batch.empty()) return;
        const auto [in, tg] = stack<T>(batch);
        const auto out = nn::infer(net, in);
        total += l2_patch_loss(out.fused, tg, per_pixel).loss * static_cast<double>(batch.size());
        count += batch.size();
        batch.clear();
    };
    for (const auto& pair : pairs) {
        if (auto p = center_patches(pair, patch)) batch.push_back(std::move(*p));
        if (batch.size() == batch_size) flush();
    }
    flush();
    if (count == 0) throw DataError("evaluate_loss: no pair is large enough for the patch size");
    return total / static_cast<double>(count);
}

template <typename T>
TrainResult<T> train(nn::Network<T> net, std::span<const DatasetPair> train_set,
                     std::span<const DatasetPair> val_set, const TrainConfig& cfg, const TrainHooks& hooks) {
    cfg.validate(net.config);
    if (train_set.empty()) throw DataError("train: empty training set");
    std::set<std::string> ids;
    for (const auto& p : train_set) ids.insert(p.id);
    for (const auto& p : val_set)
        if (ids.count(p.id)) throw DataError("train: pair '" + p.id + "' is in both training and validation sets");

    std::mt19937_64 rng(derive_seed(cfg.seed, 0x7A1));
    nn::AdamState state;
    nn::AdamHyper hyper;
    hyper.weight_decay = cfg.weight_decay;
    PlateauSchedule schedule(cfg.lr, cfg.lr_decay_factor, cfg.plateau_patience);

    TrainResult<T> result;
    result.best = net;
    result.best_val_loss = std::numeric_limits<double>::infinity();
    nn::Network<T> last_good = net;

    auto diverge = [&](const std::string& what) {
        std::optional<std::filesystem::path> path = hooks.last_good;
        if (!path && hooks.checkpoint) path = hooks.checkpoint->string() + ".last_good";
        if (path) nn::save_checkpoint(last_good, *path, {{"status", "last_good"}});
        throw NumericalError("training diverged: " + what +
                             (path ? "; last finite network written to '" + path->string() + "'" : ""));
    };

    std::vector<std::size_t> order(train_set.size());
    const std::size_t n_batches = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
    for (std::size_t epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
        const double lr = schedule.lr();
        hyper.lr = lr;
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::shuffle(order.begin(), order.end(), rng);

        double loss_sum = 0.0;
        std::size_t loss_count = 0;
        for (std::size_t b = 0; b < n_batches; ++b) {
            std::vector<PatchPair> patches;
            const std::size_t end = std::min(order.size(), (b + 1) * cfg.batch_size);
            for (std::size_t k = b * cfg.batch_size; k < end; ++k)
                if (auto p = sample_patches(train_set[order[k]], cfg.patch_size, rng, hooks.warn))
                    patches.push_back(std::move(*p));
            if (patches.empty()) continue;
            const auto [in, tg] = stack<T>(patches);
            double loss = 0.0;
            try {
                loss = train_step(net, state, hyper, in, tg, cfg.per_pixel_loss);
            } catch (const NumericalError& e) {
                diverge(e.what());
            }
            loss_sum += loss;
            ++loss_count;
            ++result.steps;
        }
        if (loss_count == 0) throw DataError("train: no training pair is large enough for the patch size");
        const double train_loss = loss_sum / static_cast<double>(loss_count);

        double val_loss = val_set.empty()
                              ? train_loss
                              : evaluate_loss(net, val_set, cfg.patch_size, cfg.batch_size, cfg.per_pixel_loss);
        if (hooks.validation_override) val_loss = hooks.validation_override(epoch, val_loss);
        if (!std::isfinite(val_loss)) diverge("validation loss is not finite");
        last_good = net;
        drop_grads(last_good);

        if (val_loss < result.best_val_loss) {
            result.best_val_loss = val_loss;
            result.best_epoch = epoch;
            result.best = last_good;
            if (hooks.checkpoint)
                nn::save_checkpoint(result.best, *hooks.checkpoint,
                                    {{"epoch", std::to_string(epoch)}, {"val_loss", format_double(val_loss)}});
        }
        schedule.observe(val_loss);

        const LossReport report{epoch, train_loss, val_loss, lr};
        result.history.push_back(report);
        if (hooks.log)
            *hooks.log << "epoch=" << epoch << " train_loss=" << format_double(train_loss)
                       << " val_loss=" << format_double(val_loss) << " lr=" << format_double(lr) << std::endl;
        if (hooks.on_epoch) hooks.on_epoch(report);
        if (schedule.lr() < cfg.min_lr) {
            result.stop_reason = "learning rate below minimum";
            return result;
        }
    }
    result.stop_reason = "max epochs reached";
    return result;
}

#define MOIRE_INSTANTIATE_TRAINER(T)                                                                      \
    template PatchLoss<T> l2_patch_loss<T>(const nn::Tensor4<T>&, const nn::Tensor4<T>&, bool);          \
    template double train_step<T>(nn::Network<T>&, nn::AdamState&, const nn::AdamHyper&,                  \
                                  const nn::Tensor4<T>&, const nn::Tensor4<T>&, bool);                    \
    template double evaluate_loss<T>(const nn::Network<T>&, std::span<const DatasetPair>, std::size_t,    \
                                     std::size_t, bool);                                                  \
    template TrainResult<T> train<T>(nn::Network<T>, std::span<const DatasetPair>,                        \
                                     std::span<const DatasetPair>, const TrainConfig&, const TrainHooks&);

MOIRE_INSTANTIATE_TRAINER(float)
MOIRE_INSTANTIATE_TRAINER(double)

}  // namespace moire::train
