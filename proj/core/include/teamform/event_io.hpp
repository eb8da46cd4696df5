#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "teamform/protocol.hpp"

namespace teamform {

/// One event per line, payload fields flattened beside "round" and "kind":
///   {"round":0,"kind":"InvitationSent","invitation":3,"sender":7,"target":12}
///   {"round":9,"kind":"DeadlineFill","teams":[[1,4,9,30]],"solos":[2]}
nlohmann::json to_json(const Event& event);
Event event_from_json(const nlohmann::json& j);

nlohmann::json partition_to_json(const Partition& p);
Partition partition_from_json(const nlohmann::json& j);

std::string to_jsonl(std::span<const Event> log);
std::vector<Event> events_from_jsonl(std::istream& in);
std::vector<Event> read_event_log(const std::filesystem::path& path);

}  // namespace teamform
