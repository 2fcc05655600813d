#include "sclim/field_io.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

#include "sclim/errors.hpp"

namespace sclim::io {

namespace {

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000000000FFull) << 56) | ((v & 0x000000000000FF00ull) << 40) |
        ((v & 0x0000000000FF0000ull) << 24) | ((v & 0x00000000FF000000ull) << 8) |
        ((v & 0x000000FF00000000ull) >> 8) | ((v & 0x0000FF0000000000ull) >> 24) |
        ((v & 0x00FF000000000000ull) >> 40) | ((v & 0xFF00000000000000ull) >> 56);
  }
  return v;
}

std::filesystem::path with_ext(const std::filesystem::path& stem, const char* ext) {
  std::filesystem::path p = stem;
  p += ext;
  return p;
}

}  // namespace

void write_doubles(const std::filesystem::path& path, std::span<const double> values) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  for (double v : values) {
    std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    out.write(reinterpret_cast<const char*>(&bits), sizeof bits);
  }
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

std::vector<double> read_doubles(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  const auto bytes = static_cast<std::size_t>(in.tellg());
  if (bytes % 8 != 0) throw std::runtime_error(path.string() + " is not a float64 dump");
  in.seekg(0);
  std::vector<double> values(bytes / 8);
  for (auto& v : values) {
    std::uint64_t bits = 0;
    in.read(reinterpret_cast<char*>(&bits), sizeof bits);
    v = std::bit_cast<double>(to_little(bits));
  }
  return values;
}

nlohmann::json grid_manifest(const SpectralGrid& grid) {
  nlohmann::json j;
  j["dimension"] = grid.dim();
  j["counts"] = grid.shape();
  std::vector<double> lengths, origin;
  for (int a = 0; a < grid.dim(); ++a) {
    lengths.push_back(grid.length(a));
    origin.push_back(grid.origin(a));
  }
  j["lengths"] = lengths;
  j["origin"] = origin;
  return j;
}

SpectralGrid grid_from_manifest(const nlohmann::json& manifest) {
  const int d = manifest.at("dimension").get<int>();
  const auto lengths = manifest.at("lengths").get<std::vector<double>>();
  const auto counts = manifest.at("counts").get<std::vector<int>>();
  return SpectralGrid(d, lengths, counts);
}

void write_array(const std::filesystem::path& stem, std::span<const double> values,
                 nlohmann::json manifest) {
  manifest["format"] = "sclim-dump";
  manifest["format_version"] = 1;
  manifest["byte_order"] = "little-endian";
  manifest["scalar"] = "float64";
  manifest["layout"] = "row-major, axis 0 slowest";
  manifest["data_file"] = with_ext(stem, ".bin").filename().string();
  write_doubles(with_ext(stem, ".bin"), values);
  write_json(with_ext(stem, ".json"), manifest);
}

void write_field(const std::filesystem::path& stem, const RealField& field) {
  nlohmann::json m = grid_manifest(field.grid());
  m["kind"] = "field";
  m["representation"] = "physical";
  m["value_type"] = "real";
  m["units"] = "dimensionless";
  write_array(stem, field.values(), std::move(m));
}

void write_field(const std::filesystem::path& stem, const ComplexField& field) {
  nlohmann::json m = grid_manifest(field.grid());
  m["kind"] = "field";
  m["representation"] = field.representation() == Representation::physical ? "physical" : "fourier";
  m["value_type"] = "complex";
  m["units"] = "dimensionless";
  std::vector<double> flat(2 * field.size());
  std::memcpy(flat.data(), field.values().data(), flat.size() * sizeof(double));
  write_array(stem, flat, std::move(m));
}

RealField read_real_field(const std::filesystem::path& stem) {
  const auto m = read_json(with_ext(stem, ".json"));
  if (m.at("value_type") != "real") throw std::runtime_error(stem.string() + " is not a real field");
  return RealField(grid_from_manifest(m), read_doubles(with_ext(stem, ".bin")));
}

ComplexField read_complex_field(const std::filesystem::path& stem) {
  const auto m = read_json(with_ext(stem, ".json"));
  if (m.at("value_type") != "complex")
    throw std::runtime_error(stem.string() + " is not a complex field");
  const auto flat = read_doubles(with_ext(stem, ".bin"));
  std::vector<Complex> values(flat.size() / 2);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] = Complex(flat[2 * i], flat[2 * i + 1]);
  const auto rep = m.at("representation") == "fourier" ? Representation::fourier
                                                       : Representation::physical;
  return ComplexField(grid_from_manifest(m), std::move(values), rep);
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& value) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << value.dump(2) << '\n';
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

}  // namespace sclim::io
