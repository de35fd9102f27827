#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "moire/image.hpp"

namespace moire {

/// A contaminated image and its pixel-aligned clean reference.
struct DatasetPair {
    std::string id;
    Image contaminated;
    Image reference;
    double psnr = 0.0;  // PSNR(contaminated, reference) recorded at construction/verification
};

/// One line of a pair manifest: tab-separated `contaminated<TAB>reference`, optional extra
/// columns ignored, blank lines and lines starting with '#' skipped. Relative paths are
/// resolved against the manifest's directory.
struct PairEntry {
    std::filesystem::path contaminated;
    std::filesystem::path reference;
};

std::vector<PairEntry> read_pair_manifest(const std::filesystem::path& path);
void write_pair_manifest(const std::filesystem::path& path, const std::vector<PairEntry>& entries);

/// Loads every pair of a manifest; ids are the contaminated file stems.
std::vector<DatasetPair> load_pairs(const std::filesystem::path& manifest, std::size_t channels = 0);

/// Splits tab-separated fields.
std::vector<std::string> split_tabs(const std::string& line);

}  // namespace moire
