#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "teamform/random.hpp"
#include "teamform/recommender.hpp"
#include "teamform/types.hpp"

namespace teamform {

enum class InvitationId : std::uint32_t {};
constexpr std::uint32_t raw(InvitationId id) noexcept { return static_cast<std::uint32_t>(id); }

enum class Response : std::uint8_t { Pending, Accepted, Declined, Ignored };
enum class InvitationStatus : std::uint8_t { Open, Merged, Rejected, Voided, Expired };

std::string_view to_string(Response r) noexcept;
std::string_view to_string(InvitationStatus s) noexcept;
Response parse_response(std::string_view text);

struct Invitation {
    InvitationId id{};
    ParticipantId sender{};
    ParticipantId target{};
    std::vector<ParticipantId> sender_group;     // sorted snapshot at send time
    std::vector<ParticipantId> recipient_group;  // sorted snapshot at send time
    std::vector<std::pair<ParticipantId, Response>> responses;  // one per recipient, snapshot order
    InvitationStatus status = InvitationStatus::Open;

    bool all_accepted() const noexcept;
    std::optional<Response> response_of(ParticipantId member) const noexcept;
    bool touches(std::span<const ParticipantId> members) const noexcept;

    friend bool operator==(const Invitation&, const Invitation&) = default;
};

// Event payloads. Each maps 1:1 onto an EventKind.
struct QueryIssued {
    ParticipantId searcher{};
    std::vector<Criterion> criteria;
    friend bool operator==(const QueryIssued&, const QueryIssued&) = default;
};
struct ShownRecommendation {
    ParticipantId candidate{};
    std::uint32_t rank = 0;
    double fit_score = 0.0;
    double diversity_score = 0.0;
    double combined_score = 0.0;
    friend bool operator==(const ShownRecommendation&, const ShownRecommendation&) = default;
};
struct RecommendationsShown {
    ParticipantId searcher{};
    std::vector<ShownRecommendation> items;
    friend bool operator==(const RecommendationsShown&, const RecommendationsShown&) = default;
};
struct InvitationSent {
    InvitationId invitation{};
    ParticipantId sender{};
    ParticipantId target{};
    friend bool operator==(const InvitationSent&, const InvitationSent&) = default;
};
struct ResponseRecorded {
    InvitationId invitation{};
    ParticipantId member{};
    Response response = Response::Pending;
    friend bool operator==(const ResponseRecorded&, const ResponseRecorded&) = default;
};
struct GroupsMerged {
    InvitationId invitation{};
    std::vector<ParticipantId> members;  // the merged group, sorted
    friend bool operator==(const GroupsMerged&, const GroupsMerged&) = default;
};
struct MemberLeft {
    ParticipantId member{};
    friend bool operator==(const MemberLeft&, const MemberLeft&) = default;
};
struct DeadlineFill {
    Partition partition;
    friend bool operator==(const DeadlineFill&, const DeadlineFill&) = default;
};

enum class EventKind : std::uint8_t {
    QueryIssued,
    RecommendationsShown,
    InvitationSent,
    ResponseRecorded,
    GroupsMerged,
    MemberLeft,
    DeadlineFill,
};

std::string_view to_string(EventKind kind) noexcept;

using EventPayload = std::variant<QueryIssued, RecommendationsShown, InvitationSent, ResponseRecorded,
                                  GroupsMerged, MemberLeft, DeadlineFill>;

struct Event {
    std::uint32_t round = 0;
    EventPayload payload;

    EventKind kind() const noexcept { return static_cast<EventKind>(payload.index()); }
    friend bool operator==(const Event&, const Event&) = default;
};

/// Team-assembly session state. Single writer; every mutation appends to the event log.
///
/// Groups start as singletons. An invitation snapshots the sender's and target's
/// groups; it merges them once every member of the target's group accepts. Any
/// membership change voids the open invitations that touch the changed groups,
/// so an open invitation always describes the current groups.
class AssemblyState {
public:
    explicit AssemblyState(std::span<const ParticipantId> participants);

    std::uint32_t round() const noexcept { return round_; }
    void advance_round();
    bool finalized() const noexcept { return finalized_; }

    std::span<const ParticipantId> participants() const noexcept { return participants_; }
    const std::vector<ParticipantId>& group_of(ParticipantId member) const;
    std::size_t group_size(ParticipantId member) const { return group_of(member).size(); }
    /// Current groups, each sorted, ordered by smallest member.
    std::vector<std::vector<ParticipantId>> groups() const;

    std::span<const Invitation> invitations() const noexcept { return invitations_; }
    const Invitation& invitation(InvitationId id) const;
    std::vector<InvitationId> open_invitations() const;
    std::span<const Event> event_log() const noexcept { return log_; }

    /// Returns the id of the new invitation, or of an already-open invitation
    /// between the same two groups.
    InvitationId send_invitation(ParticipantId sender, ParticipantId target);
    void respond(InvitationId id, ParticipantId member, Response response);
    /// No-op for a participant who is already alone.
    void leave_group(ParticipantId member);
    /// Expires open invitations, keeps full groups, and randomly packs everyone else
    /// into teams of team_size; the remainder become solos.
    Partition finalize(Rng& rng, std::size_t team_size = kMaxTeamSize);
    /// Closes the session with an externally chosen partition (random or optimized
    /// assignment). Logged as a deadline fill so replay treats both paths alike.
    void assign(const Partition& partition, std::size_t team_size = kMaxTeamSize);

    void log_query(const Query& query);
    void log_recommendations(ParticipantId searcher, std::span<const Recommendation> shown);

    std::optional<std::string> invariant_violation() const;

    /// Rebuilds a session from its log; throws Protocol if the log is inconsistent.
    static AssemblyState replay(std::span<const ParticipantId> participants, std::span<const Event> log);

    friend bool operator==(const AssemblyState& a, const AssemblyState& b);

private:
    void append(EventPayload payload);
    void require_live() const;
    Invitation& invitation_mut(InvitationId id);
    void void_touching(std::span<const ParticipantId> members, std::optional<InvitationId> except = std::nullopt);
    std::uint32_t add_group(std::vector<ParticipantId> members);
    void adopt_partition(const Partition& partition, std::size_t team_size);

    std::vector<ParticipantId> participants_;
    std::map<std::uint32_t, std::vector<ParticipantId>> groups_;
    std::unordered_map<ParticipantId, std::uint32_t> group_id_of_;
    std::uint32_t next_group_id_ = 0;
    std::vector<Invitation> invitations_;
    std::vector<Event> log_;
    std::uint32_t round_ = 0;
    bool finalized_ = false;
};

}  // namespace teamform
