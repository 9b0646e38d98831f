#pragma once

#include "csic/types.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace csic {

namespace fs = std::filesystem;

// SCUBE1: "SCUB", u32 version=1, u32 M, u32 N, u32 L, then M*N*L float64,
// all little-endian, pixel-major.
inline constexpr std::size_t kCubeHeaderBytes = 20;
// SMEAS1: "SMEA", u32 version=1, u32 S, u32 M, u32 N, f64 noise_sigma,
// 32-byte pattern hash, then S*M*N float64 row-major (S x MN).
inline constexpr std::size_t kMeasHeaderBytes = 60;

std::vector<std::uint8_t> encode_cube(const SpectralCube& cube);
SpectralCube decode_cube(std::span<const std::uint8_t> bytes);
SpectralCube load_cube(const fs::path& path);
void save_cube(const SpectralCube& cube, const fs::path& path);

std::vector<std::uint8_t> encode_measurements(const MeasurementSet& meas);
MeasurementSet decode_measurements(std::span<const std::uint8_t> bytes);
MeasurementSet load_measurements(const fs::path& path);
void save_measurements(const MeasurementSet& meas, const fs::path& path);

struct LabelCrop {
  std::size_t row0 = 0;
  std::size_t col0 = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
};

struct LabelLoadOptions {
  std::optional<LabelCrop> crop;
  // When nonempty, class keep[i] becomes i+1 and every other class becomes 0.
  std::vector<int> keep_classes;
};

LabelMap parse_labels(const std::string& text, const LabelLoadOptions& opts = {});
LabelMap load_labels(const fs::path& path, const LabelLoadOptions& opts = {});
std::string format_labels(const LabelMap& labels);
void save_labels(const LabelMap& labels, const fs::path& path);

// Pattern CSV (S rows of L comma-separated 0/1) plus JSON sidecar
// {"lambda1":[...],"lambda2":[...],"bandwidth":B} at path.replace_extension(".json").
std::string format_pattern_csv(const CodingPattern& pattern);
std::string format_pattern_sidecar(const CodingPattern& pattern);
CodingPattern parse_pattern(const std::string& csv, const std::string& sidecar);
CodingPattern load_pattern(const fs::path& csv_path);
void save_pattern(const CodingPattern& pattern, const fs::path& csv_path);
fs::path pattern_sidecar_path(const fs::path& csv_path);

// SHA-256 over the canonical CSV followed by the canonical sidecar.
std::array<std::uint8_t, 32> pattern_digest(const CodingPattern& pattern);

std::array<std::uint8_t, 32> sha256(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file(const fs::path& path);
std::string read_text(const fs::path& path);
void write_file(const fs::path& path, std::span<const std::uint8_t> bytes);
void write_text(const fs::path& path, const std::string& text);

}  // namespace csic
