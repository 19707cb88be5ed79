#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "fracnls/experiments.hpp"

namespace fracnls::io {

using nlohmann::json;

// Strict parse: unknown keys and missing required fields raise ConfigError naming the JSON path.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::filesystem::path& path);

json to_json(const ModelSpec& model);
json to_json(const LocalizationSpec& loc);
json to_json(const GridSpec& grid);
json to_json(const Point& p, int dim);
json to_json(const RunRecord& record, int dim);
ModelSpec model_from_json(const json& j, const std::string& path = "model");

// FNV-1a over the bytes of `text`, as 16 hex digits.
std::string hash_hex(const std::string& text);

// "%.17g"; round-trips doubles exactly.
std::string num(double x);

// Flat little-endian float64 array of the concatenated fields plus a JSON sidecar.
void write_fields(const std::filesystem::path& raw, const std::filesystem::path& sidecar,
                  const std::vector<std::pair<std::string, const Field*>>& fields, const json& extra);
std::vector<double> read_raw(const std::filesystem::path& raw, std::size_t count);

void write_ground_state(const std::filesystem::path& dir, const std::string& stem, const GroundStateRecord& rec,
                        const json& extra);
GroundStateRecord read_ground_state(const std::filesystem::path& dir, const std::string& stem);

void append_jsonl(const std::filesystem::path& path, const json& record);
std::size_t count_lines(const std::filesystem::path& path);

class CsvWriter {
public:
    CsvWriter(const std::filesystem::path& path, const std::vector<std::string>& header);
    void row(const std::vector<std::string>& cells);

private:
    std::ofstream out_;
    std::size_t width_;
};

void write_trace(const std::filesystem::path& path, const std::vector<TraceRow>& trace, int dim);

}  // namespace fracnls::io
