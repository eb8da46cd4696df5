#include "teamform/population_io.hpp"

#include <fstream>
#include <sstream>

#include "teamform/error.hpp"

namespace teamform {

namespace {

constexpr const char* kCsvHeader =
    "id,gender,race,hispanic,international,age,campaigns,coordination,design,recruiting,writing,presenting";

int parse_int(const std::string& field, const std::string& what, std::size_t line) {
    try {
        std::size_t used = 0;
        int v = std::stoi(field, &used);
        if (used != field.size()) throw std::invalid_argument(field);
        return v;
    } catch (const std::exception&) {
        fail(ErrorCategory::InvalidInput,
             "line " + std::to_string(line) + ": bad " + what + " value '" + field + "'");
    }
}

bool parse_flag(const std::string& field, const std::string& what, std::size_t line) {
    if (field == "1" || field == "true") return true;
    if (field == "0" || field == "false") return false;
    fail(ErrorCategory::InvalidInput, "line " + std::to_string(line) + ": bad " + what + " flag '" + field + "'");
}

}  // namespace

PopulationFormat population_format_for(const std::filesystem::path& path) {
    return path.extension() == ".csv" ? PopulationFormat::Csv : PopulationFormat::Jsonl;
}

nlohmann::json to_json(const Participant& p) {
    nlohmann::json j;
    j["id"] = raw(p.id);
    j["gender"] = std::string(to_string(p.gender));
    j["race"] = std::string(to_string(p.race));
    j["hispanic"] = p.hispanic;
    j["international"] = p.international;
    j["age"] = p.age;
    j["skills"] = p.skills;
    return j;
}

Participant participant_from_json(const nlohmann::json& j) {
    try {
        Participant p;
        p.id = participant_id(j.at("id").get<std::uint32_t>());
        p.gender = parse_gender(j.at("gender").get<std::string>());
        p.race = parse_race(j.at("race").get<std::string>());
        p.hispanic = j.at("hispanic").get<bool>();
        p.international = j.at("international").get<bool>();
        p.age = j.at("age").get<int>();
        const auto& skills = j.at("skills");
        require(skills.is_array() && skills.size() == kSkillCount, ErrorCategory::InvalidInput,
                "skills must be an array of 6 levels");
        for (std::size_t s = 0; s < kSkillCount; ++s) p.skills[s] = skills[s].get<int>();
        validate(p);
        return p;
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCategory::InvalidInput, std::string("participant record: ") + e.what());
    }
}

std::string to_jsonl(const Population& population) {
    std::string out;
    for (const auto& p : population.members()) {
        out += to_json(p).dump();
        out += '\n';
    }
    return out;
}

std::string to_csv(const Population& population) {
    std::ostringstream out;
    out << kCsvHeader << '\n';
    for (const auto& p : population.members()) {
        out << raw(p.id) << ',' << to_string(p.gender) << ',' << to_string(p.race) << ',' << (p.hispanic ? 1 : 0)
            << ',' << (p.international ? 1 : 0) << ',' << p.age;
        for (int level : p.skills) out << ',' << level;
        out << '\n';
    }
    return out.str();
}

Population population_from_jsonl(std::istream& in) {
    std::vector<Participant> members;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCategory::InvalidInput, "line " + std::to_string(line_no) + ": " + e.what());
        }
        members.push_back(participant_from_json(j));
    }
    return Population(std::move(members));
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ss(line);
    while (std::getline(ss, field, ',')) {
        if (!field.empty() && field.back() == '\r') field.pop_back();
        fields.push_back(field);
    }
    if (!line.empty() && line.back() == ',') fields.emplace_back();
    return fields;
}

Population population_from_csv(std::istream& in) {
    std::string line;
    require(static_cast<bool>(std::getline(in, line)), ErrorCategory::InvalidInput, "empty population CSV");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    require(line == kCsvHeader, ErrorCategory::InvalidInput, "unexpected population CSV header: " + line);

    std::vector<Participant> members;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto f = split_csv_line(line);
        require(f.size() == 6 + kSkillCount, ErrorCategory::InvalidInput,
                "line " + std::to_string(line_no) + ": expected 12 fields");
        Participant p;
        p.id = participant_id(static_cast<std::uint32_t>(parse_int(f[0], "id", line_no)));
        p.gender = parse_gender(f[1]);
        p.race = parse_race(f[2]);
        p.hispanic = parse_flag(f[3], "hispanic", line_no);
        p.international = parse_flag(f[4], "international", line_no);
        p.age = parse_int(f[5], "age", line_no);
        for (std::size_t s = 0; s < kSkillCount; ++s) p.skills[s] = parse_int(f[6 + s], "skill", line_no);
        validate(p);
        members.push_back(p);
    }
    return Population(std::move(members));
}

Population read_population(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCategory::Io, "cannot open population file " + path.string());
    try {
        return population_format_for(path) == PopulationFormat::Csv ? population_from_csv(in)
                                                                     : population_from_jsonl(in);
    } catch (const Error& e) {
        throw Error(e.category(), path.string() + ": " + e.what());
    }
}

void write_population(const std::filesystem::path& path, const Population& population, PopulationFormat format) {
    write_text_file(path, format == PopulationFormat::Csv ? to_csv(population) : to_jsonl(population));
}

void write_population(const std::filesystem::path& path, const Population& population) {
    write_population(path, population, population_format_for(path));
}

void write_text_file(const std::filesystem::path& path, const std::string& content) {
    std::error_code ec;
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path(), ec);
    require(!ec, ErrorCategory::Io, "cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    require(out.good(), ErrorCategory::Io, "cannot open " + path.string() + " for writing");
    out << content;
    out.flush();
    require(out.good(), ErrorCategory::Io, "write failed for " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    require(in.good(), ErrorCategory::Io, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace teamform
