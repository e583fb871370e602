#pragma once

#include "neurotree/evolution/evolution.hpp"
#include "neurotree/runner/runner.hpp"

#include <filesystem>
#include <stdexcept>
#include <string>

namespace neurotree::runner {

/// Container layout:
///   line 1   "neurotree-checkpoint <version>"
///   body     one JSON document
///   last     "sha256 <64 hex digits>" over every byte before this line
/// Readers accept any version <= kCheckpointVersion.
inline constexpr int kCheckpointVersion = 1;

class CorruptCheckpoint : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct Checkpoint {
    evolution::EvolutionState state;
    std::vector<std::pair<CacheKey, CacheEntry>> cache;
    std::size_t requests_served = 0;
    /// Opaque identity of the run configuration; resume refuses a mismatch.
    std::string config_fingerprint;
};

std::string serialize_checkpoint(const Checkpoint& ckpt);
/// Throws CorruptCheckpoint on a bad header, digest mismatch, truncation or
/// an expression that no longer parses against `pset`.
Checkpoint parse_checkpoint(const std::string& text, const gp::PrimitiveSet& pset);

/// Writes through a temporary file and renames, so a crash never leaves a
/// half-written checkpoint under `path`.
void write_checkpoint(const std::filesystem::path& path, const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path, const gp::PrimitiveSet& pset);

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

} // namespace neurotree::runner
