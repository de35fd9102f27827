#include "moire/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "moire/errors.hpp"

namespace moire::nn {
namespace {

constexpr std::string_view kMagic = "MOIRE-CHECKPOINT";

void write_f32_le(std::ostream& out, std::span<const float> values) {
    std::vector<char> buf(values.size() * 4);
    for (std::size_t i = 0; i < values.size(); ++i) {
        std::uint32_t bits = std::bit_cast<std::uint32_t>(values[i]);
        for (int b = 0; b < 4; ++b) buf[i * 4 + b] = static_cast<char>((bits >> (8 * b)) & 0xFFu);
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
}

std::vector<float> read_f32_le(std::istream& in, std::size_t count, const std::string& block) {
    std::vector<char> buf(count * 4);
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (static_cast<std::size_t>(in.gcount()) != buf.size())
        throw DataError("checkpoint: truncated data for parameter block '" + block + "'");
    std::vector<float> out(count);
    for (std::size_t i = 0; i < count; ++i) {
        std::uint32_t bits = 0;
        for (int b = 0; b < 4; ++b)
            bits |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i * 4 + b])) << (8 * b);
        out[i] = std::bit_cast<float>(bits);
    }
    return out;
}

}  // namespace

template <typename T>
void save_checkpoint(const Network<T>& net, std::ostream& out,
                     const std::map<std::string, std::string>& meta) {
    auto& mut = const_cast<Network<T>&>(net);
    const auto params = mut.parameters();
    out << kMagic << '\n' << "version=" << kCheckpointVersion << '\n' << "seed=" << net.seed << '\n';
    for (const auto& [k, v] : net.config.to_kv()) out << "config." << k << '=' << v << '\n';
    for (const auto& [k, v] : meta) {
        if (k.find_first_of("=\n") != std::string::npos || v.find('\n') != std::string::npos)
            throw ConfigError("checkpoint: metadata key/value may not contain '=' or newlines");
        out << "meta." << k << '=' << v << '\n';
    }
    out << "params=" << params.size() << '\n';
    for (const auto& p : params) {
        const Dims& d = p.tensor->dims();
        out << "param " << p.name << ' ' << d.n << ' ' << d.c << ' ' << d.h << ' ' << d.w << '\n';
    }
    out << "end_header\n";
    for (const auto& p : params) {
        std::vector<float> values(p.tensor->size());
        auto src = p.tensor->data();
        for (std::size_t i = 0; i < values.size(); ++i) values[i] = static_cast<float>(src[i]);
        write_f32_le(out, values);
    }
    if (!out) throw DataError("checkpoint: write failed");
}

template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("checkpoint: cannot open '" + path.string() + "' for writing");
    save_checkpoint(net, out, meta);
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != kMagic) throw DataError("checkpoint: bad magic line");

    std::map<std::string, std::string> header;
    std::map<std::string, std::string> config_kv;
    std::map<std::string, std::string> meta;
    struct Entry {
        std::string name;
        Dims dims;
    };
    std::vector<Entry> manifest;
    bool ended = false;
    while (std::getline(in, line)) {
        if (line == "end_header") {
            ended = true;
            break;
        }
        if (line.rfind("param ", 0) == 0) {
            std::istringstream ss(line.substr(6));
            Entry e;
            if (!(ss >> e.name >> e.dims.n >> e.dims.c >> e.dims.h >> e.dims.w))
                throw DataError("checkpoint: malformed manifest line '" + line + "'");
            manifest.push_back(e);
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError("checkpoint: malformed header line '" + line + "'");
        const std::string key = line.substr(0, eq);
        const std::string value = line.substr(eq + 1);
        if (key.rfind("config.", 0) == 0) config_kv[key.substr(7)] = value;
        else if (key.rfind("meta.", 0) == 0) meta[key.substr(5)] = value;
        else header[key] = value;
    }
    if (!ended) throw DataError("checkpoint: header not terminated");
    if (!header.contains("version")) throw DataError("checkpoint: missing version field");
    if (header["version"] != std::to_string(kCheckpointVersion))
        throw DataError("checkpoint: unsupported version " + header["version"]);
    if (!header.contains("params") || std::to_string(manifest.size()) != header["params"])
        throw DataError("checkpoint: parameter count does not match manifest");

    NetworkConfig config;
    try {
        config = NetworkConfig::from_kv(config_kv);
    } catch (const ConfigError& e) {
        throw DataError(std::string("checkpoint: ") + e.what());
    }
    std::uint64_t seed = 0;
    try {
        seed = std::stoull(header.at("seed"));
    } catch (const std::exception&) {
        throw DataError("checkpoint: missing or malformed seed");
    }

    LoadedCheckpoint<T> result{build_network<T>(config, seed, 0.0), std::move(meta)};
    auto params = result.net.parameters();
    if (params.size() != manifest.size())
        throw DataError("checkpoint: manifest has " + std::to_string(manifest.size()) +
                        " blocks, configuration implies " + std::to_string(params.size()));
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i].name != manifest[i].name || params[i].tensor->dims() != manifest[i].dims)
            throw DataError("checkpoint: manifest entry '" + manifest[i].name + " " +
                            to_string(manifest[i].dims) + "' does not match expected '" +
                            params[i].name + " " + to_string(params[i].tensor->dims()) + "'");
    }
    for (auto& p : params) {
        const auto values = read_f32_le(in, p.tensor->size(), p.name);
        auto dst = p.tensor->data();
        for (std::size_t i = 0; i < values.size(); ++i) dst[i] = static_cast<T>(values[i]);
    }
    return result;
}

template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("checkpoint: cannot open '" + path.string() + "'");
    return load_checkpoint<T>(in);
}

#define MOIRE_INSTANTIATE_CHECKPOINT(T)                                                         \
    template void save_checkpoint<T>(const Network<T>&, std::ostream&,                          \
                                     const std::map<std::string, std::string>&);                \
    template void save_checkpoint<T>(const Network<T>&, const std::filesystem::path&,           \
                                     const std::map<std::string, std::string>&);                \
    template LoadedCheckpoint<T> load_checkpoint<T>(std::istream&);                             \
    template LoadedCheckpoint<T> load_checkpoint<T>(const std::filesystem::path&);

MOIRE_INSTANTIATE_CHECKPOINT(float)
MOIRE_INSTANTIATE_CHECKPOINT(double)

#undef MOIRE_INSTANTIATE_CHECKPOINT

}  // namespace moire::nn
