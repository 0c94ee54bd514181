#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "negev/param_set.hpp"
#include "negev/tensor.hpp"

namespace negev {

/// Checkpoint layout ("NGVCKPT1" container):
///   magic   8 bytes "NGVCKPT1"
///   per tensor, until end of file:
///     u32  name length (little-endian)
///     ...  name bytes
///     u32  rank
///     u64  extent per axis
///     f64  values, row-major, little-endian IEEE-754
/// Round-trips are bit-exact.
void save_checkpoint(const std::filesystem::path& path, const ParamSet& params);

std::vector<std::pair<std::string, Tensor>> load_checkpoint(
    const std::filesystem::path& path);

/// Copies checkpoint values into an existing ParamSet. Names, order and
/// shapes must match exactly.
void load_checkpoint_into(const std::filesystem::path& path, ParamSet& params);

/// FNV-1a hash of a file's bytes; used to assert checkpoint immutability.
std::uint64_t file_hash(const std::filesystem::path& path);

}  // namespace negev
