#include "moire/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "moire/errors.hpp"
#include "moire/image_io.hpp"
#include "moire/metrics.hpp"
#include "moire/random.hpp"

namespace moire::synth {
namespace {

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Bayer RGGB colour of camera pixel (row a, column b).
int bayer_channel(std::size_t a, std::size_t b) {
    if (a % 2 == 0) return b % 2 == 0 ? 0 : 1;
    return b % 2 == 0 ? 1 : 2;
}

struct Screen {
    const Image& ref;
    double pitch;
    double black_matrix;
    double gain;

    // Light emitted at physical screen position (x, y) in colour channel ch.
    [[nodiscard]] double emission(double x, double y, int ch) const {
        const double u = x / pitch, v = y / pitch;
        const double fj = std::floor(u), fi = std::floor(v);
        const double fu = u - fj, fv = v - fi;
        if (std::min(2, static_cast<int>(3.0 * fu)) != ch) return 0.0;
        if (fv >= 1.0 - black_matrix) return 0.0;
        const auto j = static_cast<std::size_t>(std::clamp(fj, 0.0, static_cast<double>(ref.width() - 1)));
        const auto i = static_cast<std::size_t>(std::clamp(fi, 0.0, static_cast<double>(ref.height() - 1)));
        return gain * ref.at(static_cast<std::size_t>(ch), i, j);
    }
};

// Fills the two missing colours at each site with the mean of same-colour 3x3 neighbours.
Image demosaic_bilinear(const Image& raw_rgb, const std::vector<std::uint8_t>& has) {
    const std::size_t h = raw_rgb.height(), w = raw_rgb.width();
    Image out = raw_rgb;
    for (std::size_t c = 0; c < 3; ++c)
        for (std::size_t y = 0; y < h; ++y)
            for (std::size_t x = 0; x < w; ++x) {
                if (has[(c * h + y) * w + x]) continue;
                double sum = 0.0;
                int count = 0;
                for (int dy = -1; dy <= 1; ++dy)
                    for (int dx = -1; dx <= 1; ++dx) {
                        const long ny = static_cast<long>(y) + dy, nx = static_cast<long>(x) + dx;
                        if (ny < 0 || nx < 0 || ny >= static_cast<long>(h) || nx >= static_cast<long>(w)) continue;
                        const auto uy = static_cast<std::size_t>(ny), ux = static_cast<std::size_t>(nx);
                        if (!has[(c * h + uy) * w + ux]) continue;
                        sum += raw_rgb.at(c, uy, ux);
                        ++count;
                    }
                out.at(c, y, x) = count ? sum / count : 0.0;
            }
    return out;
}

double bilinear(const Image& img, std::size_t c, double x, double y) {
    x = std::clamp(x, 0.0, static_cast<double>(img.width() - 1));
    y = std::clamp(y, 0.0, static_cast<double>(img.height() - 1));
    const auto x0 = static_cast<std::size_t>(x), y0 = static_cast<std::size_t>(y);
    const std::size_t x1 = std::min(x0 + 1, img.width() - 1), y1 = std::min(y0 + 1, img.height() - 1);
    const double fx = x - static_cast<double>(x0), fy = y - static_cast<double>(y0);
    const double top = img.at(c, y0, x0) + fx * (img.at(c, y0, x1) - img.at(c, y0, x0));
    const double bot = img.at(c, y1, x0) + fx * (img.at(c, y1, x1) - img.at(c, y1, x0));
    return top + fy * (bot - top);
}

}  // namespace

align::Homography MoireParams::view() const {
    const double k = 1.0 / camera_sample_rate;
    Eigen::Matrix3d m;
    m << k * std::cos(rotation), -k * std::sin(rotation), 0.0,  //
        k * std::sin(rotation), k * std::cos(rotation), 0.0,    //
        perspective_x, perspective_y, 1.0;
    return align::Homography(m);
}

MoireParams draw_params(std::mt19937_64& rng, const SynthOptions& opt) {
    MoireParams p;
    do {
        p.camera_sample_rate = uniform(rng, opt.min_rate, opt.max_rate);
    } while (std::abs(p.camera_sample_rate - 1.0) < opt.min_rate_offset);
    p.rotation = uniform(rng, -opt.max_rotation_deg, opt.max_rotation_deg) * std::numbers::pi / 180.0;
    p.perspective_x = uniform(rng, -opt.max_perspective, opt.max_perspective);
    p.perspective_y = uniform(rng, -opt.max_perspective, opt.max_perspective);
    p.sensor = uniform(rng, 0.0, 1.0) < opt.bayer_probability ? SensorPattern::bayer_rggb : SensorPattern::plain;
    p.black_matrix = uniform(rng, 0.1, 0.3);
    p.exposure = uniform(rng, opt.min_exposure, opt.max_exposure);
    p.strength = uniform(rng, opt.min_strength, opt.max_strength);
    return p;
}

Image simulate_capture(const Image& reference, const MoireParams& params) {
    if (reference.empty()) throw ShapeError("simulate_capture: empty reference");
    for (double v : reference.data())
        if (!(v >= 0.0 && v <= 1.0)) throw DataError("simulate_capture: reference values must lie in [0, 1]");
    if (params.strength == 0.0) return reference;
    if (reference.channels() == 1) {
        MoireParams p = params;
        return luminance(simulate_capture(convert_channels(reference, 3), p));
    }
    if (reference.channels() != 3) throw ShapeError("simulate_capture: reference must have 1 or 3 channels");
    if (params.subsamples < 1 || params.camera_sample_rate <= 0.0 || params.screen_pixel_pitch <= 0.0 ||
        params.black_matrix < 0.0 || params.black_matrix >= 1.0)
        throw ConfigError("simulate_capture: invalid screen or camera parameters");

    const double pitch = params.screen_pixel_pitch;
    const double sw = static_cast<double>(reference.width()) * pitch;
    const double sh = static_cast<double>(reference.height()) * pitch;
    const Screen screen{reference, pitch, params.black_matrix, 3.0 / (1.0 - params.black_matrix)};
    const align::Homography view = params.view();
    const align::Homography inv = view.inverse();

    double ex = 0.0, ey = 0.0;
    for (const align::Point2 corner : {align::Point2{-sw / 2, -sh / 2}, align::Point2{sw / 2, -sh / 2},
                                       align::Point2{-sw / 2, sh / 2}, align::Point2{sw / 2, sh / 2}}) {
        const align::Point2 c = inv.apply(corner);
        ex = std::max(ex, std::abs(c.x));
        ey = std::max(ey, std::abs(c.y));
    }
    const auto cw = static_cast<std::size_t>(2.0 * std::ceil(ex) + 4.0);
    const auto ch = static_cast<std::size_t>(2.0 * std::ceil(ey) + 4.0);
    const double ox = static_cast<double>(cw) / 2.0, oy = static_cast<double>(ch) / 2.0;

    const bool bayer = params.sensor == SensorPattern::bayer_rggb;
    const int s = params.subsamples;
    Image raw(3, ch, cw);
    std::vector<std::uint8_t> has(3 * ch * cw, bayer ? 0 : 1);
    for (std::size_t a = 0; a < ch; ++a)
        for (std::size_t b = 0; b < cw; ++b) {
            const int first = bayer ? bayer_channel(a, b) : 0;
            const int last = bayer ? first : 2;
            std::array<double, 3> acc{};
            for (int sy = 0; sy < s; ++sy)
                for (int sx = 0; sx < s; ++sx) {
                    const align::Point2 c{static_cast<double>(b) + (sx + 0.5) / s - ox,
                                          static_cast<double>(a) + (sy + 0.5) / s - oy};
                    const align::Point2 p = view.apply(c);
                    for (int k = first; k <= last; ++k) acc[k] += screen.emission(p.x + sw / 2, p.y + sh / 2, k);
                }
            for (int k = first; k <= last; ++k) {
                raw.at(static_cast<std::size_t>(k), a, b) = params.exposure * acc[k] / (s * s);
                has[(static_cast<std::size_t>(k) * ch + a) * cw + b] = 1;
            }
        }
    const Image photo = bayer ? demosaic_bilinear(raw, has) : raw;

    Image out(3, reference.height(), reference.width());
    for (std::size_t i = 0; i < reference.height(); ++i)
        for (std::size_t j = 0; j < reference.width(); ++j) {
            const align::Point2 p{(static_cast<double>(j) + 0.5) * pitch - sw / 2,
                                  (static_cast<double>(i) + 0.5) * pitch - sh / 2};
            const align::Point2 c = inv.apply(p);
            for (std::size_t k = 0; k < 3; ++k) {
                const double captured = bilinear(photo, k, c.x + ox - 0.5, c.y + oy - 0.5);
                const double r = reference.at(k, i, j);
                out.at(k, i, j) = std::clamp(r + params.strength * (captured - r), 0.0, 1.0);
            }
        }
    return out;
}

std::optional<SimulatedPair> simulate_pair(const Image& reference, std::mt19937_64& rng,
                                           const SynthOptions& opt) {
    for (int attempt = 1; attempt <= opt.max_attempts; ++attempt) {
        SimulatedPair pair;
        pair.params = draw_params(rng, opt);
        pair.contaminated = simulate_capture(reference, pair.params);
        pair.psnr = metrics::psnr(pair.contaminated, reference);
        pair.attempts = attempt;
        if (pair.psnr >= opt.eta) return pair;
    }
    return std::nullopt;
}

Image procedural_reference(std::size_t width, std::size_t height, std::mt19937_64& rng, bool smooth_only) {
    Image img(3, height, width);
    std::array<double, 3> c0{}, c1{};
    for (auto& v : c0) v = uniform(rng, 0.1, 0.9);
    for (auto& v : c1) v = uniform(rng, 0.1, 0.9);
    const double angle = uniform(rng, 0.0, 2.0 * std::numbers::pi);
    const double gx = std::cos(angle), gy = std::sin(angle);
    const double scale = 1.0 / static_cast<double>(std::max(width, height));

    struct Wave {
        double fx, fy, phase;
        std::array<double, 3> amp;
    };
    std::vector<Wave> waves(3);
    for (auto& wv : waves) {
        const double f = uniform(rng, 0.5, 3.0) * 2.0 * std::numbers::pi * scale;
        const double a = uniform(rng, 0.0, 2.0 * std::numbers::pi);
        wv = {f * std::cos(a), f * std::sin(a), uniform(rng, 0.0, 2.0 * std::numbers::pi), {}};
        for (auto& v : wv.amp) v = uniform(rng, -0.12, 0.12);
    }
    for (std::size_t y = 0; y < height; ++y)
        for (std::size_t x = 0; x < width; ++x) {
            const double t = 0.5 + ((static_cast<double>(x) - width / 2.0) * gx +
                                    (static_cast<double>(y) - height / 2.0) * gy) * scale;
            for (std::size_t c = 0; c < 3; ++c) {
                double v = c0[c] + (c1[c] - c0[c]) * t;
                for (const auto& wv : waves) v += wv.amp[c] * std::sin(wv.fx * x + wv.fy * y + wv.phase);
                img.at(c, y, x) = v;
            }
        }

    if (!smooth_only) {
        const int shapes = std::uniform_int_distribution<int>(2, 6)(rng);
        for (int s = 0; s < shapes; ++s) {
            const double cx = uniform(rng, 0.0, width), cy = uniform(rng, 0.0, height);
            const double rx = uniform(rng, 0.08, 0.35) * width, ry = uniform(rng, 0.08, 0.35) * height;
            const bool ellipse = uniform(rng, 0.0, 1.0) < 0.5;
            const bool textured = uniform(rng, 0.0, 1.0) < 0.25;
            const double period = uniform(rng, 4.0, 10.0);
            std::array<double, 3> colour{};
            for (auto& v : colour) v = uniform(rng, 0.05, 0.95);
            for (std::size_t y = 0; y < height; ++y)
                for (std::size_t x = 0; x < width; ++x) {
                    // 2x2 supersampled coverage for soft edges.
                    double cover = 0.0;
                    for (int sy = 0; sy < 2; ++sy)
                        for (int sx = 0; sx < 2; ++sx) {
                            const double dx = (x + 0.25 + 0.5 * sx - cx) / rx;
                            const double dy = (y + 0.25 + 0.5 * sy - cy) / ry;
                            const bool in = ellipse ? dx * dx + dy * dy <= 1.0
                                                    : std::abs(dx) <= 1.0 && std::abs(dy) <= 1.0;
                            cover += in ? 0.25 : 0.0;
                        }
                    if (cover == 0.0) continue;
                    const double tex = textured ? 0.12 * std::sin(2.0 * std::numbers::pi * x / period) : 0.0;
                    for (std::size_t c = 0; c < 3; ++c)
                        img.at(c, y, x) = (1.0 - cover) * img.at(c, y, x) + cover * (colour[c] + tex);
                }
        }
    }
    return clamp01(std::move(img));
}

SplitSizes split_sizes(std::size_t n) {
    const std::size_t train = n * 9 / 10;
    const std::size_t val = (n - train) / 2;
    return {train, val, n - train - val};
}

SyntheticDataset make_dataset(std::span<const Image> references, std::size_t n_pairs, std::uint64_t seed,
                              const SynthOptions& opt) {
    if (references.empty()) throw DataError("make_dataset: no reference images");
    std::vector<DatasetPair> pairs;
    pairs.reserve(n_pairs);
    std::size_t failures = 0;
    for (std::uint64_t k = 0; pairs.size() < n_pairs; ++k) {
        std::mt19937_64 rng(derive_seed(seed, 0x5EED, k));
        const Image& source = references[k % references.size()];
        Image ref = source;
        if (opt.pair_size && (source.width() > opt.pair_size || source.height() > opt.pair_size)) {
            if (source.width() < opt.pair_size || source.height() < opt.pair_size)
                throw DataError("make_dataset: reference smaller than pair size");
            const auto x0 = std::uniform_int_distribution<std::size_t>(0, source.width() - opt.pair_size)(rng);
            const auto y0 = std::uniform_int_distribution<std::size_t>(0, source.height() - opt.pair_size)(rng);
            ref = crop(source, x0, y0, opt.pair_size, opt.pair_size);
        }
        ref = clamp01(convert_channels(ref, source.channels() == 1 ? 1 : 3));
        auto sim = simulate_pair(ref, rng, opt);
        if (!sim) {
            if (++failures > n_pairs + 10)
                throw DataError("make_dataset: too many references fail the PSNR floor");
            continue;
        }
        char id[32];
        std::snprintf(id, sizeof id, "pair%05zu", pairs.size() + 1);
        pairs.push_back({id, std::move(sim->contaminated), std::move(ref), sim->psnr});
    }
    const SplitSizes sizes = split_sizes(n_pairs);
    SyntheticDataset ds;
    auto it = std::make_move_iterator(pairs.begin());
    ds.train.assign(it, it + static_cast<std::ptrdiff_t>(sizes.train));
    ds.val.assign(it + static_cast<std::ptrdiff_t>(sizes.train),
                  it + static_cast<std::ptrdiff_t>(sizes.train + sizes.val));
    ds.test.assign(it + static_cast<std::ptrdiff_t>(sizes.train + sizes.val), std::make_move_iterator(pairs.end()));
    return ds;
}

std::vector<Image> procedural_references(std::size_t count, std::size_t size, std::uint64_t seed) {
    std::vector<Image> out;
    for (std::size_t i = 0; i < count; ++i) {
        std::mt19937_64 rng(derive_seed(seed, 0xAEF, i));
        out.push_back(procedural_reference(size, size, rng));
    }
    return out;
}

std::vector<Image> load_reference_dir(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw DataError("'" + dir.string() + "' is not a directory");
    std::vector<std::filesystem::path> files;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        std::string ext = e.path().extension().string();
        std::ranges::transform(ext, ext.begin(), [](unsigned char c) { return std::tolower(c); });
        if (e.is_regular_file() && (ext == ".png" || ext == ".ppm" || ext == ".pgm")) files.push_back(e.path());
    }
    if (files.empty()) throw DataError("no reference images in '" + dir.string() + "'");
    std::ranges::sort(files);
    std::vector<Image> out;
    for (const auto& f : files) out.push_back(io::read_image(f));
    return out;
}

void write_dataset(const SyntheticDataset& ds, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir / "pairs");
    auto emit = [&](const std::vector<DatasetPair>& pairs, const char* name) {
        std::vector<PairEntry> entries;
        for (const auto& p : pairs) {
            const std::filesystem::path moire = std::filesystem::path("pairs") / (p.id + "_moire.png");
            const std::filesystem::path clean = std::filesystem::path("pairs") / (p.id + "_clean.png");
            io::write_image(p.contaminated, dir / moire);
            io::write_image(p.reference, dir / clean);
            entries.push_back({moire, clean});
        }
        write_pair_manifest(dir / name, entries);
    };
    emit(ds.train, "train.tsv");
    emit(ds.val, "val.tsv");
    emit(ds.test, "test.tsv");
}

}  // namespace moire::synth
