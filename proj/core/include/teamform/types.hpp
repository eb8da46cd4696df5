#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace teamform {

enum class ParticipantId : std::uint32_t {};

constexpr std::uint32_t raw(ParticipantId id) noexcept { return static_cast<std::uint32_t>(id); }
constexpr ParticipantId participant_id(std::uint32_t value) noexcept { return ParticipantId{value}; }

inline constexpr std::size_t kSkillCount = 6;
inline constexpr std::size_t kMaxTeamSize = 4;
inline constexpr int kMinAge = 18;
inline constexpr int kMinSkill = 1;
inline constexpr int kMaxSkill = 5;

enum class Gender : std::uint8_t { Male, Female, NonBinary };
enum class Race : std::uint8_t { White, Asian, AfricanAmerican, AmericanIndian, MultipleRaces, Other };

inline constexpr std::size_t kGenderCount = 3;
inline constexpr std::size_t kRaceCount = 6;

// The six project skills, in file/column order.
enum class Skill : std::uint8_t { Campaigns, Coordination, Design, Recruiting, Writing, Presenting };

std::string_view to_string(Gender g) noexcept;
std::string_view to_string(Race r) noexcept;
std::string_view to_string(Skill s) noexcept;
Gender parse_gender(std::string_view text);
Race parse_race(std::string_view text);
Skill parse_skill(std::string_view text);

struct Participant {
    ParticipantId id{};
    Gender gender = Gender::Female;
    Race race = Race::White;
    bool hispanic = false;
    bool international = false;
    int age = kMinAge;
    std::array<int, kSkillCount> skills{1, 1, 1, 1, 1, 1};

    int skill(Skill s) const { return skills[static_cast<std::size_t>(s)]; }

    friend bool operator==(const Participant&, const Participant&) = default;
};

/// Throws InvalidInput if age < 18 or a skill leaves [1,5].
void validate(const Participant& p);

/// Immutable set of participants with id lookup.
class Population {
public:
    Population() = default;
    explicit Population(std::vector<Participant> members);

    std::span<const Participant> members() const noexcept { return members_; }
    std::size_t size() const noexcept { return members_.size(); }
    bool empty() const noexcept { return members_.empty(); }

    const Participant& at(ParticipantId id) const;
    const Participant* find(ParticipantId id) const noexcept;
    bool contains(ParticipantId id) const noexcept { return find(id) != nullptr; }
    std::size_t index_of(ParticipantId id) const;

    std::vector<ParticipantId> ids() const;

    friend bool operator==(const Population& a, const Population& b) { return a.members_ == b.members_; }

private:
    std::vector<Participant> members_;
    std::unordered_map<std::uint32_t, std::size_t> index_;
};

struct Team {
    std::vector<ParticipantId> members;  // kept sorted

    std::size_t size() const noexcept { return members.size(); }
    friend bool operator==(const Team&, const Team&) = default;
    friend auto operator<=>(const Team&, const Team&) = default;
};

struct Partition {
    std::vector<Team> teams;
    std::vector<ParticipantId> solos;

    friend bool operator==(const Partition&, const Partition&) = default;
};

/// Sorts members within teams, teams lexicographically, and solos.
Partition canonical(Partition p);

/// FNV-1a over the canonical form; stable across runs and platforms.
std::uint64_t partition_hash(const Partition& p);

/// Empty optional when `p` is a disjoint exact cover of `population` with
/// every team of size 1..max_team_size; otherwise a description of the first violation.
std::optional<std::string> partition_violation(const Partition& p, const Population& population,
                                               std::size_t max_team_size = kMaxTeamSize);

/// Throws InvalidInput with the violation text.
void validate_partition(const Partition& p, const Population& population,
                        std::size_t max_team_size = kMaxTeamSize);

}  // namespace teamform

template <>
struct std::hash<teamform::ParticipantId> {
    std::size_t operator()(teamform::ParticipantId id) const noexcept {
        return std::hash<std::uint32_t>{}(teamform::raw(id));
    }
};
