#include "teamform/event_io.hpp"

#include <fstream>
#include <sstream>

#include "teamform/error.hpp"

namespace teamform {

namespace {

std::vector<std::uint32_t> raw_ids(std::span<const ParticipantId> ids) {
    std::vector<std::uint32_t> out;
    out.reserve(ids.size());
    for (auto id : ids) out.push_back(raw(id));
    return out;
}

std::vector<ParticipantId> ids_from(const nlohmann::json& j) {
    std::vector<ParticipantId> out;
    for (const auto& v : j) out.push_back(participant_id(v.get<std::uint32_t>()));
    return out;
}

ParticipantId pid(const nlohmann::json& j, const char* key) {
    return participant_id(j.at(key).get<std::uint32_t>());
}

InvitationId iid(const nlohmann::json& j) { return InvitationId{j.at("invitation").get<std::uint32_t>()}; }

}  // namespace

nlohmann::json partition_to_json(const Partition& p) {
    nlohmann::json j;
    j["teams"] = nlohmann::json::array();
    for (const auto& t : p.teams) j["teams"].push_back(raw_ids(t.members));
    j["solos"] = raw_ids(p.solos);
    return j;
}

Partition partition_from_json(const nlohmann::json& j) {
    Partition p;
    for (const auto& t : j.at("teams")) p.teams.push_back({ids_from(t)});
    p.solos = ids_from(j.at("solos"));
    return p;
}

nlohmann::json to_json(const Event& event) {
    nlohmann::json j;
    j["round"] = event.round;
    j["kind"] = std::string(to_string(event.kind()));
    std::visit(
        [&j](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, QueryIssued>) {
                j["searcher"] = raw(p.searcher);
                j["criteria"] = nlohmann::json::array();
                for (const auto& c : p.criteria) {
                    j["criteria"].push_back({{"criterion", criterion_key(c)}, {"importance", c.importance}});
                }
            } else if constexpr (std::is_same_v<T, RecommendationsShown>) {
                j["searcher"] = raw(p.searcher);
                j["items"] = nlohmann::json::array();
                for (const auto& r : p.items) {
                    j["items"].push_back({{"candidate", raw(r.candidate)},
                                          {"rank", r.rank},
                                          {"fit", r.fit_score},
                                          {"diversity", r.diversity_score},
                                          {"combined", r.combined_score}});
                }
            } else if constexpr (std::is_same_v<T, InvitationSent>) {
                j["invitation"] = raw(p.invitation);
                j["sender"] = raw(p.sender);
                j["target"] = raw(p.target);
            } else if constexpr (std::is_same_v<T, ResponseRecorded>) {
                j["invitation"] = raw(p.invitation);
                j["member"] = raw(p.member);
                j["response"] = std::string(to_string(p.response));
            } else if constexpr (std::is_same_v<T, GroupsMerged>) {
                j["invitation"] = raw(p.invitation);
                j["members"] = raw_ids(p.members);
            } else if constexpr (std::is_same_v<T, MemberLeft>) {
                j["member"] = raw(p.member);
            } else if constexpr (std::is_same_v<T, DeadlineFill>) {
                const auto pj = partition_to_json(p.partition);
                j["teams"] = pj["teams"];
                j["solos"] = pj["solos"];
            }
        },
        event.payload);
    return j;
}

Event event_from_json(const nlohmann::json& j) {
    try {
        Event e;
        e.round = j.at("round").get<std::uint32_t>();
        const auto kind = j.at("kind").get<std::string>();
        if (kind == "QueryIssued") {
            QueryIssued p{pid(j, "searcher"), {}};
            for (const auto& c : j.at("criteria")) {
                p.criteria.push_back(parse_criterion(c.at("criterion").get<std::string>(), c.at("importance").get<int>()));
            }
            e.payload = std::move(p);
        } else if (kind == "RecommendationsShown") {
            RecommendationsShown p{pid(j, "searcher"), {}};
            for (const auto& r : j.at("items")) {
                p.items.push_back({pid(r, "candidate"), r.at("rank").get<std::uint32_t>(), r.at("fit").get<double>(),
                                   r.at("diversity").get<double>(), r.at("combined").get<double>()});
            }
            e.payload = std::move(p);
        } else if (kind == "InvitationSent") {
            e.payload = InvitationSent{iid(j), pid(j, "sender"), pid(j, "target")};
        } else if (kind == "ResponseRecorded") {
            e.payload = ResponseRecorded{iid(j), pid(j, "member"), parse_response(j.at("response").get<std::string>())};
        } else if (kind == "GroupsMerged") {
            e.payload = GroupsMerged{iid(j), ids_from(j.at("members"))};
        } else if (kind == "MemberLeft") {
            e.payload = MemberLeft{pid(j, "member")};
        } else if (kind == "DeadlineFill") {
            e.payload = DeadlineFill{partition_from_json(j)};
        } else {
            fail(ErrorCategory::InvalidInput, "unknown event kind '" + kind + "'");
        }
        return e;
    } catch (const nlohmann::json::exception& ex) {
        fail(ErrorCategory::InvalidInput, std::string("event record: ") + ex.what());
    }
}

std::string to_jsonl(std::span<const Event> log) {
    std::string out;
    for (const auto& e : log) {
        out += to_json(e).dump();
        out += '\n';
    }
    return out;
}

std::vector<Event> events_from_jsonl(std::istream& in) {
    std::vector<Event> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        try {
            out.push_back(event_from_json(nlohmann::json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCategory::InvalidInput, "line " + std::to_string(line_no) + ": " + e.what());
        } catch (const Error& e) {
            throw Error(e.category(), "line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return out;
}

std::vector<Event> read_event_log(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), ErrorCategory::Io, "cannot open event log " + path.string());
    try {
        return events_from_jsonl(in);
    } catch (const Error& e) {
        throw Error(e.category(), path.string() + ": " + e.what());
    }
}

}  // namespace teamform
