#pragma once

// Binary field dumps: raw little-endian IEEE-754 doubles, row-major with axis 0
// slowest, no header. Complex values are stored as interleaved (re, im) pairs.
// A sibling "<stem>.json" manifest describes the layout.

#include <filesystem>
#include <span>
#include <string>

#include <json.hpp>

#include "sclim/spectral.hpp"

namespace sclim::io {

void write_doubles(const std::filesystem::path& path, std::span<const double> values);
std::vector<double> read_doubles(const std::filesystem::path& path);

nlohmann::json grid_manifest(const SpectralGrid& grid);
SpectralGrid grid_from_manifest(const nlohmann::json& manifest);

/// Writes "<stem>.bin" and "<stem>.json".
void write_field(const std::filesystem::path& stem, const RealField& field);
void write_field(const std::filesystem::path& stem, const ComplexField& field);
RealField read_real_field(const std::filesystem::path& stem);
ComplexField read_complex_field(const std::filesystem::path& stem);

/// Writes a raw array with a caller-supplied manifest (adds format/byte-order keys).
void write_array(const std::filesystem::path& stem, std::span<const double> values,
                 nlohmann::json manifest);

nlohmann::json read_json(const std::filesystem::path& path);
void write_json(const std::filesystem::path& path, const nlohmann::json& value);

/// Shortest decimal form with 17 significant digits.
std::string format_double(double value);

}  // namespace sclim::io
