#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "moire/network.hpp"

namespace moire::nn {

/// Checkpoint container layout:
///
///     MOIRE-CHECKPOINT
///     version=1
///     seed=<u64>
///     config.<key>=<value>        (NetworkConfig::to_kv)
///     meta.<key>=<value>          (free-form, e.g. epoch, validation loss)
///     params=<count>
///     param <name> <n> <c> <h> <w>   (one per parameter block, manifest order)
///     end_header
///     <little-endian float32 blocks in manifest order>
inline constexpr int kCheckpointVersion = 1;

template <typename T>
void save_checkpoint(const Network<T>& net, std::ostream& out,
                     const std::map<std::string, std::string>& meta = {});
template <typename T>
void save_checkpoint(const Network<T>& net, const std::filesystem::path& path,
                     const std::map<std::string, std::string>& meta = {});

template <typename T>
struct LoadedCheckpoint {
    Network<T> net;
    std::map<std::string, std::string> meta;
};

/// Rebuilds the network from the header and fills its parameters. Throws DataError on a
/// malformed file or a manifest that does not match the recorded configuration.
template <typename T>
LoadedCheckpoint<T> load_checkpoint(std::istream& in);
template <typename T>
LoadedCheckpoint<T> load_checkpoint(const std::filesystem::path& path);

}  // namespace moire::nn
