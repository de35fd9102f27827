#include "moire/dataset.hpp"

#include <fstream>
#include <sstream>

#include "moire/errors.hpp"
#include "moire/image_io.hpp"
#include "moire/metrics.hpp"

namespace moire {

std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, '\t')) out.push_back(field);
    if (!line.empty() && line.back() == '\t') out.emplace_back();
    return out;
}

std::vector<PairEntry> read_pair_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open manifest '" + path.string() + "'");
    const auto base = path.parent_path();
    std::vector<PairEntry> out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split_tabs(line);
        if (fields.size() < 2 || fields[0].empty() || fields[1].empty())
            throw DataError(path.string() + ":" + std::to_string(lineno) +
                            ": expected '<contaminated>\\t<reference>'");
        auto resolve = [&](const std::string& p) {
            std::filesystem::path fp(p);
            return fp.is_absolute() ? fp : base / fp;
        };
        out.push_back({resolve(fields[0]), resolve(fields[1])});
    }
    return out;
}

void write_pair_manifest(const std::filesystem::path& path, const std::vector<PairEntry>& entries) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write manifest '" + path.string() + "'");
    out << "# contaminated\treference\n";
    for (const auto& e : entries) out << e.contaminated.string() << '\t' << e.reference.string() << '\n';
}

std::vector<DatasetPair> load_pairs(const std::filesystem::path& manifest, std::size_t channels) {
    std::vector<DatasetPair> pairs;
    for (const auto& e : read_pair_manifest(manifest)) {
        DatasetPair p;
        p.id = e.contaminated.stem().string();
        p.contaminated = io::read_image(e.contaminated);
        p.reference = io::read_image(e.reference);
        if (channels) {
            p.contaminated = convert_channels(p.contaminated, channels);
            p.reference = convert_channels(p.reference, channels);
        } else if (p.contaminated.channels() != p.reference.channels()) {
            p.reference = convert_channels(p.reference, p.contaminated.channels());
        }
        if (!p.contaminated.same_shape(p.reference))
            throw DataError("pair '" + p.id + "': contaminated and reference sizes differ");
        p.psnr = metrics::psnr(p.contaminated, p.reference);
        pairs.push_back(std::move(p));
    }
    return pairs;
}

}  // namespace moire
