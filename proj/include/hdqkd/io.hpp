#pragma once

#include <hdqkd/protocol.hpp>
#include <hdqkd/security.hpp>

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hdqkd::io {

// Insertion-ordered so emitted documents are stable byte for byte.
using json = nlohmann::ordered_json;

/// @brief Filesystem failure; the CLI maps it to exit code 2.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_text_file(const std::filesystem::path& p);
void write_text_file(const std::filesystem::path& p, const std::string& content);
std::vector<std::uint8_t> read_binary_file(const std::filesystem::path& p);
void write_binary_file(const std::filesystem::path& p, const std::vector<std::uint8_t>& bytes);
json load_json_file(const std::filesystem::path& p);

// Compiled-in data directory, overridable with the HDQKD_DATA_DIR variable.
std::filesystem::path default_data_dir();

// Validates `value` against a schema restricted to the keywords type,
// required, properties, additionalProperties, items, enum, minimum, maximum,
// minItems and maxItems. Throws std::runtime_error naming the failing path.
void validate_json(const json& schema, const json& value, const std::string& where = "$");

// Loaders; each validates against the matching schema in <data>/schemas.
RecipeTable load_recipe_table(const std::filesystem::path& file, const std::filesystem::path& data_dir);
PortMap load_port_map(const std::filesystem::path& file, const std::filesystem::path& data_dir);

// Accepts a preset name living under <data>/presets or a path to a JSON file.
RunSettings load_preset(const std::string& name_or_path, const std::filesystem::path& data_dir);

// Serializers. Two-bit symbols travel as "00".."11" strings so width is
// never lost; bases as "vector"/"scalar".
std::string bits_label(std::uint8_t bits);
std::uint8_t parse_bits_label(const std::string& label);

json state_json(const StateXd& s);
json bench_modes_json(const Bench& bench);

std::string crosstalk_csv(const CrosstalkMatrix& m);
json crosstalk_json(const CrosstalkMatrix& m);
std::string render_heatmap(const CrosstalkMatrix& m);

json security_report_json(const SecurityReport& r);
std::string render_report_table(const SecurityReport& r);

json transcript_record_json(const ProtocolSymbol& sym);
std::string transcript_ndjson(const Transcript& t);
json bb84_summary_json(const Transcript& t, double qber_value, std::uint64_t key_bits);

std::vector<std::uint8_t> pack_bits(const std::vector<std::uint8_t>& bits);
std::vector<std::uint8_t> unpack_bits(const std::vector<std::uint8_t>& bytes);
std::string hex_string(const std::vector<std::uint8_t>& bytes);

}  // namespace hdqkd::io
