#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

#include <json.hpp>

#include "triode/disk.hpp"
#include "triode/potential.hpp"

namespace triode::io {

inline constexpr int kFormatVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);
std::string hex64(std::uint64_t h);

/// Hash of the raw float64 values of a field (bitwise identity check).
std::uint64_t field_hash(const Field &field);
std::uint64_t file_hash(const std::filesystem::path &path);

/// Writes `data` to a sibling temp file and renames it over `path`.
void write_atomic(const std::filesystem::path &path, std::string_view data);
std::string read_file(const std::filesystem::path &path);

nlohmann::json to_json(const PotentialSpec &spec);
PotentialSpec potential_from_json(const nlohmann::json &j);

struct FieldFile {
  Field field;
  PotentialSpec spec = PotentialSpec::cubic();
};

/// Field dump: `path` holds N*N (u1, u2) float64 pairs in row-major order
/// (row j = y index), `path`.json holds the sidecar metadata.
void write_field(const std::filesystem::path &path, const Field &field, const PotentialSpec &spec);
FieldFile read_field(const std::filesystem::path &path);
std::filesystem::path sidecar_path(const std::filesystem::path &path);

/// CSV of profile nodes with columns eta,u1,u2.
std::string profile_csv(const ConnectionProfile &profile);

std::string format_double(double v);

}  // namespace triode::io
