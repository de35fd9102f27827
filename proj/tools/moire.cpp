#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "moire/checkpoint.hpp"
#include "moire/config.hpp"
#include "moire/errors.hpp"
#include "moire/image_io.hpp"
#include "moire/inspect.hpp"
#include "moire/metrics.hpp"
#include "moire/network.hpp"
#include "moire/random.hpp"
#include "moire/registration.hpp"
#include "moire/restore.hpp"
#include "moire/synth.hpp"
#include "moire/trainer.hpp"

namespace fs = std::filesystem;
using namespace moire;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Global {
    std::string config;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string variant = "default";
    bool grayscale = false;
};

KeyValues load_config(const Global& g) { return g.config.empty() ? KeyValues{} : read_key_values(g.config); }

/// Records how an output was produced, beside that output.
void write_run_manifest(const fs::path& dir, const std::string& subcommand, const Global& g,
                        const KeyValues& inputs, const KeyValues& outputs) {
    KeyValues kv{{"subcommand", subcommand},
                 {"config", g.config},
                 {"seed", std::to_string(g.seed)},
                 {"threads", std::to_string(g.threads)},
                 {"variant", g.variant},
                 {"grayscale", g.grayscale ? "true" : "false"},
                 {"tool_version", kVersion}};
    for (const auto& [k, v] : inputs) kv["input." + k] = v;
    for (const auto& [k, v] : outputs) kv["output." + k] = v;
    fs::create_directories(dir.empty() ? fs::path(".") : dir);
    write_key_values((dir.empty() ? fs::path(".") : dir) / "run_manifest.txt", kv);
}

nn::NetworkConfig network_config(const Global& g, const KeyValues& cfg) {
    nn::NetworkConfig base = nn::NetworkConfig::for_variant(nn::parse_variant(g.variant));
    KeyValues kv = base.to_kv();
    for (const auto& [k, v] : with_prefix(cfg, "net.")) kv[k] = v;
    nn::NetworkConfig c = nn::NetworkConfig::from_kv(kv);
    if (g.grayscale) c.input_channels = 1;
    c.validate();
    return c;
}

std::string fmt(double v, int precision = 4) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(precision) << v;
    return s.str();
}

int run_param_count(const Global& g) {
    std::cout << nn::param_count(network_config(g, load_config(g))) << '\n';
    return 0;
}

struct SynthArgs {
    std::string out;
    std::string references;
    std::size_t pairs = 500;
    std::size_t pair_size = 64;
    std::size_t reference_size = 96;
    std::size_t reference_count = 0;
};

int run_synth(const Global& g, const SynthArgs& a) {
    const KeyValues cfg = with_prefix(load_config(g), "synth.");
    synth::SynthOptions opt;
    opt.pair_size = kv_size(cfg, "pair_size", a.pair_size);
    opt.eta = kv_double(cfg, "eta", opt.eta);
    opt.min_rate = kv_double(cfg, "min_rate", opt.min_rate);
    opt.max_rate = kv_double(cfg, "max_rate", opt.max_rate);
    opt.max_rotation_deg = kv_double(cfg, "max_rotation_deg", opt.max_rotation_deg);
    opt.min_strength = kv_double(cfg, "min_strength", opt.min_strength);
    opt.max_strength = kv_double(cfg, "max_strength", opt.max_strength);
    opt.bayer_probability = kv_double(cfg, "bayer_probability", opt.bayer_probability);
    const std::size_t pairs = kv_size(cfg, "pairs", a.pairs);
    if (pairs == 0) throw ConfigError("synth-dataset: --pairs must be positive");

    std::vector<Image> refs;
    if (!a.references.empty()) {
        refs = synth::load_reference_dir(a.references);
    } else {
        const std::size_t size = std::max(kv_size(cfg, "reference_size", a.reference_size), opt.pair_size);
        refs = synth::procedural_references(a.reference_count ? a.reference_count : pairs, size,
                                            derive_seed(g.seed, 0x4EF));
    }
    if (g.grayscale)
        for (auto& r : refs) r = luminance(r);
    const auto ds = synth::make_dataset(refs, pairs, g.seed, opt);
    synth::write_dataset(ds, a.out);
    double mean = 0.0;
    for (const auto* split : {&ds.train, &ds.val, &ds.test})
        for (const auto& p : *split) mean += p.psnr;
    std::cerr << "wrote " << ds.train.size() << "/" << ds.val.size() << "/" << ds.test.size()
              << " train/val/test pairs to " << a.out << " (mean input PSNR " << fmt(mean / pairs, 2) << " dB)\n";
    write_run_manifest(a.out, "synth-dataset", g, {{"references", a.references.empty() ? "procedural" : a.references}},
                       {{"train", "train.tsv"}, {"val", "val.tsv"}, {"test", "test.tsv"}});
    return 0;
}

struct AlignArgs {
    std::string manifest;
    std::string out;
    double eta = align::kDefaultEta;
    std::optional<std::size_t> crop_border;
};

int run_align(const Global& g, const AlignArgs& a) {
    align::RegistrationOptions opt;
    opt.eta = a.eta;
    opt.crop_border = a.crop_border;
    const auto rows = align::ingest_manifest(a.manifest, a.out, opt);
    std::size_t accepted = 0;
    for (const auto& r : rows) accepted += r.accepted;
    std::cerr << accepted << " of " << rows.size() << " pairs accepted\n";
    write_run_manifest(a.out, "align", g, {{"manifest", a.manifest}}, {{"pairs", "pairs.tsv"}, {"report", "report.tsv"}});
    return 0;
}

int run_verify(const Global&, const std::string& pairs, double eta) {
    const auto entries = read_pair_manifest(pairs);
    std::size_t accepted = 0;
    std::cout << "pair\tpsnr\tdecision\n";
    for (const auto& e : entries) {
        const Image a = io::read_image(e.contaminated);
        const Image b = convert_channels(io::read_image(e.reference), a.channels());
        const auto v = align::verify_pair(a, b, eta);
        accepted += v.accepted;
        std::cout << e.contaminated.stem().string() << '\t' << fmt(v.psnr) << '\t'
                  << (v.accepted ? "accept" : "reject") << '\n';
    }
    std::cerr << accepted << " of " << entries.size() << " pairs accepted at eta " << eta << '\n';
    return 0;
}

struct TrainArgs {
    std::string train;
    std::string val;
    std::string out;
    std::optional<std::size_t> epochs, patch, batch, cascade_channels, base_channels;
    std::optional<double> lr;
    std::optional<std::string> init;
    bool per_pixel = false;
};

int run_train(const Global& g, const TrainArgs& a) {
    const KeyValues cfg = load_config(g);
    nn::NetworkConfig nc = network_config(g, cfg);
    if (a.cascade_channels) nc.cascade_channels = *a.cascade_channels;
    if (a.base_channels) nc.base_channels = *a.base_channels;
    nc.validate();
    train::TrainConfig tc = train::TrainConfig::from_kv(with_prefix(cfg, "train."));
    tc.seed = g.seed;
    if (a.epochs) tc.max_epochs = *a.epochs;
    if (a.patch) tc.patch_size = *a.patch;
    if (a.batch) tc.batch_size = *a.batch;
    if (a.lr) tc.lr = *a.lr;
    if (a.per_pixel) tc.per_pixel_loss = true;
    tc.validate(nc);

    const auto train_set = load_pairs(a.train, nc.input_channels);
    const auto val_set = a.val.empty() ? std::vector<DatasetPair>{} : load_pairs(a.val, nc.input_channels);
    const auto init_it = cfg.find("train.init");
    const std::string init_name = a.init ? *a.init : init_it != cfg.end() ? init_it->second : "gaussian";
    const nn::InitScheme init = nn::parse_init_scheme(init_name);
    auto net = nn::build_network<float>(nc, derive_seed(g.seed, 0x1A1), init);
    std::cerr << "training " << nc.to_kv().at("branches") << " branches, " << net.parameter_count()
              << " parameters, " << train_set.size() << " training pairs\n";

    const fs::path out(a.out);
    fs::create_directories(out);
    std::ofstream log(out / "train.log");
    train::TrainHooks hooks;
    hooks.checkpoint = out / "model.ckpt";
    hooks.log = &log;
    hooks.warn = &std::cerr;
    hooks.on_epoch = [](const train::LossReport& r) {
        std::cerr << "epoch " << r.epoch << " train " << fmt(r.train_loss) << " val " << fmt(r.val_loss) << " lr "
                  << r.lr << '\n';
    };
    KeyValues saved = tc.to_kv();
    saved["init"] = init_name;
    write_key_values(out / "train_config.txt", saved);
    const auto result = train::train<float>(std::move(net), train_set, val_set, tc, hooks);
    std::cerr << "best epoch " << result.best_epoch << " (" << result.stop_reason << ")\n";
    write_run_manifest(out, "train", g, {{"train", a.train}, {"val", a.val}},
                       {{"checkpoint", "model.ckpt"}, {"log", "train.log"}, {"train_config", "train_config.txt"}});
    return 0;
}

int run_infer(const Global& g, const std::string& checkpoint, const std::string& in, const std::string& out) {
    const auto ck = nn::load_checkpoint<float>(fs::path(checkpoint));
    const Image input = io::read_image(in);
    io::write_image(restore(ck.net, input), out);
    write_run_manifest(fs::path(out).parent_path(), "infer", g, {{"checkpoint", checkpoint}, {"image", in}},
                       {{"image", fs::path(out).filename().string()}});
    return 0;
}

int run_eval(const Global& g, const std::string& checkpoint, const std::string& pairs, const std::string& out_dir) {
    const auto ck = nn::load_checkpoint<float>(fs::path(checkpoint));
    const auto set = load_pairs(pairs, ck.net.config.input_channels);
    if (set.empty()) throw DataError("eval: '" + pairs + "' lists no pairs");
    std::vector<metrics::QualityReport> before, after;
    std::cout << "pair\tinput_psnr\toutput_psnr\toutput_ssim\toutput_mse\n";
    for (const auto& p : set) {
        const Image corrected = align::correct_intensity(p.contaminated, p.reference).adjusted;
        const Image restored = restore(ck.net, p.contaminated);
        before.push_back(metrics::evaluate(corrected, p.reference));
        after.push_back(metrics::evaluate(restored, p.reference));
        std::cout << p.id << '\t' << fmt(before.back().psnr) << '\t' << fmt(after.back().psnr) << '\t'
                  << fmt(after.back().ssim) << '\t' << fmt(after.back().mse, 6) << '\n';
        if (!out_dir.empty()) {
            fs::create_directories(out_dir);
            io::write_image(restored, fs::path(out_dir) / (p.id + "_restored.png"));
        }
    }
    const auto b = metrics::mean_report(before), r = metrics::mean_report(after);
    std::cout << "PSNR Mean\t" << fmt(r.psnr) << '\n'
              << "PSNR Gain\t" << fmt(r.psnr - b.psnr) << '\n'
              << "Ave Error\t" << fmt(r.mse, 6) << '\n'
              << "SSIM\t" << fmt(r.ssim) << '\n';
    if (!out_dir.empty())
        write_run_manifest(out_dir, "eval", g, {{"checkpoint", checkpoint}, {"pairs", pairs}}, {{"images", "."}});
    return 0;
}

int run_inspect(const Global& g, const std::string& checkpoint, const std::string& in, const std::string& out_dir,
                double amplification) {
    const auto ck = nn::load_checkpoint<float>(fs::path(checkpoint));
    const nn::NetworkConfig& c = ck.net.config;
    const Image input = convert_channels(io::read_image(in), c.input_channels);
    const std::size_t div = c.size_divisor();
    const Image padded = pad_replicate(input, round_up(input.height(), div), round_up(input.width(), div));
    const auto visuals = nn::inspect_branches(ck.net, to_tensor<float>(padded), amplification);
    const auto paths = nn::write_branch_visuals(visuals, out_dir, fs::path(in).stem().string());
    for (const auto& p : paths) std::cout << p.string() << '\n';
    write_run_manifest(out_dir, "inspect-branches", g, {{"checkpoint", checkpoint}, {"image", in}},
                       {{"amplification", format_double(amplification)}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multiresolution moire removal: data synthesis, registration, training and inference"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);
    app.fallthrough();

    Global g;
    app.add_option("--config", g.config, "key=value configuration file");
    app.add_option("--seed", g.seed, "Seed from which every random stream is derived");
    app.add_option("--threads", g.threads, "Worker threads (computation is single-threaded)")
        ->check(CLI::PositiveNumber);
    app.add_option("--variant", g.variant, "Architecture variant")
        ->check(CLI::IsMember({"default", "v_concate", "v_skip", "v_c32", "v_b123", "v_b135", "v_b15"}));
    app.add_flag("--grayscale", g.grayscale, "Single-channel images and networks");

    auto* pc = app.add_subcommand("param-count", "Print the parameter count of the selected architecture");

    SynthArgs sa;
    auto* sy = app.add_subcommand("synth-dataset", "Generate synthetic moire pairs with train/val/test manifests");
    sy->add_option("--out", sa.out, "Output directory")->required();
    sy->add_option("--references", sa.references, "Directory of clean reference images (default: procedural)");
    sy->add_option("--pairs", sa.pairs, "Number of pairs")->check(CLI::PositiveNumber);
    sy->add_option("--size", sa.pair_size, "Square pair size in pixels")->check(CLI::PositiveNumber);
    sy->add_option("--reference-size", sa.reference_size, "Size of procedural references");
    sy->add_option("--reference-count", sa.reference_count, "Number of procedural references (default: one per pair)");

    AlignArgs aa;
    auto* al = app.add_subcommand("align", "Register captured photos against framed references");
    al->add_option("--manifest", aa.manifest, "TSV of photo<TAB>reference paths")->required();
    al->add_option("--out", aa.out, "Output directory")->required();
    al->add_option("--eta", aa.eta, "PSNR acceptance threshold in dB");
    al->add_option("--crop-border", aa.crop_border, "Crop to the frame interior inset by this many pixels");

    std::string verify_pairs;
    double verify_eta = align::kDefaultEta;
    auto* ve = app.add_subcommand("verify", "Accept or reject aligned pairs by PSNR");
    ve->add_option("--pairs", verify_pairs, "Pair manifest")->required();
    ve->add_option("--eta", verify_eta, "PSNR acceptance threshold in dB");

    TrainArgs ta;
    auto* tr = app.add_subcommand("train", "Train a network on a pair manifest");
    tr->add_option("--train", ta.train, "Training pair manifest")->required();
    tr->add_option("--val", ta.val, "Validation pair manifest");
    tr->add_option("--out", ta.out, "Output directory")->required();
    tr->add_option("--epochs", ta.epochs, "Maximum epochs");
    tr->add_option("--patch", ta.patch, "Patch size");
    tr->add_option("--batch", ta.batch, "Batch size");
    tr->add_option("--lr", ta.lr, "Initial learning rate");
    tr->add_option("--cascade-channels", ta.cascade_channels, "Width of the wide layers");
    tr->add_option("--base-channels", ta.base_channels, "Width of the narrow layers");
    tr->add_option("--init", ta.init, "Weight initialisation")
        ->check(CLI::IsMember({"gaussian", "fan_in", "identity"}));
    tr->add_flag("--per-pixel-loss", ta.per_pixel, "Normalize the loss by patch pixel count");

    std::string ck, in, out, out_dir;
    auto* inf = app.add_subcommand("infer", "Restore one image");
    inf->add_option("--checkpoint", ck, "Checkpoint file")->required();
    inf->add_option("--in", in, "Input image")->required();
    inf->add_option("--out", out, "Output image (.png, .ppm, .pgm)")->required();

    std::string eval_pairs;
    auto* ev = app.add_subcommand("eval", "Score a checkpoint on a pair manifest");
    ev->add_option("--checkpoint", ck, "Checkpoint file")->required();
    ev->add_option("--pairs", eval_pairs, "Pair manifest")->required();
    ev->add_option("--out-dir", out_dir, "Also write restored images here");

    double amplification = 4.0;
    auto* ib = app.add_subcommand("inspect-branches", "Export each branch's output map");
    ib->add_option("--checkpoint", ck, "Checkpoint file")->required();
    ib->add_option("--in", in, "Input image")->required();
    ib->add_option("--out-dir", out_dir, "Output directory")->required();
    ib->add_option("--amplification", amplification, "Gain for the amplified maps")->check(CLI::PositiveNumber);

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (pc->parsed()) return run_param_count(g);
        if (sy->parsed()) return run_synth(g, sa);
        if (al->parsed()) return run_align(g, aa);
        if (ve->parsed()) return run_verify(g, verify_pairs, verify_eta);
        if (tr->parsed()) return run_train(g, ta);
        if (inf->parsed()) return run_infer(g, ck, in, out);
        if (ev->parsed()) return run_eval(g, ck, eval_pairs, out_dir);
        if (ib->parsed()) return run_inspect(g, ck, in, out_dir, amplification);
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const ShapeError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
