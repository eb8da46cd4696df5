#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include <json.hpp>

#include "teamform/types.hpp"

namespace teamform {

/// Population files come in two encodings with the same fields.
///
/// JSONL: one object per line,
///   {"id":7,"gender":"Female","race":"Asian","hispanic":false,
///    "international":true,"age":24,"skills":[3,4,2,5,1,3]}
///
/// CSV: header line
///   id,gender,race,hispanic,international,age,campaigns,coordination,design,recruiting,writing,presenting
/// with booleans written as 0/1.
enum class PopulationFormat { Jsonl, Csv };

/// Chosen from the extension: ".csv" is CSV, anything else JSONL.
PopulationFormat population_format_for(const std::filesystem::path& path);

nlohmann::json to_json(const Participant& p);
Participant participant_from_json(const nlohmann::json& j);

std::string to_jsonl(const Population& population);
std::string to_csv(const Population& population);
Population population_from_jsonl(std::istream& in);
Population population_from_csv(std::istream& in);

Population read_population(const std::filesystem::path& path);
void write_population(const std::filesystem::path& path, const Population& population);
void write_population(const std::filesystem::path& path, const Population& population, PopulationFormat format);

/// Writes `content` to `path`, creating parent directories. Throws Io with the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& content);
std::string read_text_file(const std::filesystem::path& path);

/// Splits one CSV line on commas (no quoting; none of our fields contain commas).
std::vector<std::string> split_csv_line(const std::string& line);

}  // namespace teamform
