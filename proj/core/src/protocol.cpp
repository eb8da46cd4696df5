#include "teamform/protocol.hpp"

#include <algorithm>
#include <unordered_set>

#include "teamform/error.hpp"

namespace teamform {

namespace {

std::string id_text(ParticipantId id) { return std::to_string(raw(id)); }
std::string id_text(InvitationId id) { return std::to_string(raw(id)); }

[[noreturn]] void protocol_error(const std::string& message) { fail(ErrorCategory::Protocol, message); }

bool same_pair(const Invitation& inv, const std::vector<ParticipantId>& a, const std::vector<ParticipantId>& b) {
    return (inv.sender_group == a && inv.recipient_group == b) || (inv.sender_group == b && inv.recipient_group == a);
}

}  // namespace

std::string_view to_string(Response r) noexcept {
    switch (r) {
    case Response::Pending: return "Pending";
    case Response::Accepted: return "Accepted";
    case Response::Declined: return "Declined";
    case Response::Ignored: return "Ignored";
    }
    return "Pending";
}

std::string_view to_string(InvitationStatus s) noexcept {
    switch (s) {
    case InvitationStatus::Open: return "Open";
    case InvitationStatus::Merged: return "Merged";
    case InvitationStatus::Rejected: return "Rejected";
    case InvitationStatus::Voided: return "Voided";
    case InvitationStatus::Expired: return "Expired";
    }
    return "Open";
}

Response parse_response(std::string_view text) {
    for (auto r : {Response::Pending, Response::Accepted, Response::Declined, Response::Ignored}) {
        if (to_string(r) == text) return r;
    }
    fail(ErrorCategory::InvalidInput, "unknown response '" + std::string(text) + "'");
}

std::string_view to_string(EventKind kind) noexcept {
    switch (kind) {
    case EventKind::QueryIssued: return "QueryIssued";
    case EventKind::RecommendationsShown: return "RecommendationsShown";
    case EventKind::InvitationSent: return "InvitationSent";
    case EventKind::ResponseRecorded: return "ResponseRecorded";
    case EventKind::GroupsMerged: return "GroupsMerged";
    case EventKind::MemberLeft: return "MemberLeft";
    case EventKind::DeadlineFill: return "DeadlineFill";
    }
    return "QueryIssued";
}

bool Invitation::all_accepted() const noexcept {
    return std::all_of(responses.begin(), responses.end(),
                       [](const auto& r) { return r.second == Response::Accepted; });
}

std::optional<Response> Invitation::response_of(ParticipantId member) const noexcept {
    for (const auto& [who, response] : responses) {
        if (who == member) return response;
    }
    return std::nullopt;
}

bool Invitation::touches(std::span<const ParticipantId> members) const noexcept {
    auto in = [&](ParticipantId id) { return std::find(members.begin(), members.end(), id) != members.end(); };
    return std::any_of(sender_group.begin(), sender_group.end(), in) ||
           std::any_of(recipient_group.begin(), recipient_group.end(), in);
}

AssemblyState::AssemblyState(std::span<const ParticipantId> participants)
    : participants_(participants.begin(), participants.end()) {
    std::sort(participants_.begin(), participants_.end());
    require(std::adjacent_find(participants_.begin(), participants_.end()) == participants_.end(),
            ErrorCategory::InvalidInput, "duplicate participant in session");
    for (auto id : participants_) add_group({id});
}

void AssemblyState::advance_round() { ++round_; }

const std::vector<ParticipantId>& AssemblyState::group_of(ParticipantId member) const {
    auto it = group_id_of_.find(member);
    if (it == group_id_of_.end()) protocol_error("unknown participant " + id_text(member));
    return groups_.at(it->second);
}

std::vector<std::vector<ParticipantId>> AssemblyState::groups() const {
    std::vector<std::vector<ParticipantId>> out;
    out.reserve(groups_.size());
    for (const auto& [gid, members] : groups_) out.push_back(members);
    std::sort(out.begin(), out.end());
    return out;
}

const Invitation& AssemblyState::invitation(InvitationId id) const {
    require(raw(id) < invitations_.size(), ErrorCategory::Protocol, "unknown invitation " + id_text(id));
    return invitations_[raw(id)];
}

Invitation& AssemblyState::invitation_mut(InvitationId id) {
    require(raw(id) < invitations_.size(), ErrorCategory::Protocol, "unknown invitation " + id_text(id));
    return invitations_[raw(id)];
}

std::vector<InvitationId> AssemblyState::open_invitations() const {
    std::vector<InvitationId> out;
    for (const auto& inv : invitations_) {
        if (inv.status == InvitationStatus::Open) out.push_back(inv.id);
    }
    return out;
}

void AssemblyState::append(EventPayload payload) { log_.push_back({round_, std::move(payload)}); }

void AssemblyState::require_live() const {
    if (finalized_) protocol_error("session already finalized");
}

std::uint32_t AssemblyState::add_group(std::vector<ParticipantId> members) {
    std::sort(members.begin(), members.end());
    const std::uint32_t gid = next_group_id_++;
    for (auto id : members) group_id_of_[id] = gid;
    groups_.emplace(gid, std::move(members));
    return gid;
}

void AssemblyState::void_touching(std::span<const ParticipantId> members, std::optional<InvitationId> except) {
    for (auto& inv : invitations_) {
        if (inv.status != InvitationStatus::Open || (except && inv.id == *except)) continue;
        if (inv.touches(members)) inv.status = InvitationStatus::Voided;
    }
}

InvitationId AssemblyState::send_invitation(ParticipantId sender, ParticipantId target) {
    require_live();
    const auto& sender_group = group_of(sender);
    const auto& recipient_group = group_of(target);
    if (group_id_of_.at(sender) == group_id_of_.at(target)) protocol_error("already teammates");
    if (sender_group.size() + recipient_group.size() > kMaxTeamSize) {
        protocol_error("merge would exceed team size");
    }
    for (const auto& inv : invitations_) {
        if (inv.status == InvitationStatus::Open && same_pair(inv, sender_group, recipient_group)) return inv.id;
    }

    Invitation inv;
    inv.id = InvitationId{static_cast<std::uint32_t>(invitations_.size())};
    inv.sender = sender;
    inv.target = target;
    inv.sender_group = sender_group;
    inv.recipient_group = recipient_group;
    for (auto member : recipient_group) inv.responses.emplace_back(member, Response::Pending);
    invitations_.push_back(std::move(inv));
    append(InvitationSent{invitations_.back().id, sender, target});
    return invitations_.back().id;
}

void AssemblyState::respond(InvitationId id, ParticipantId member, Response response) {
    require_live();
    Invitation& inv = invitation_mut(id);
    if (inv.status != InvitationStatus::Open) {
        protocol_error("invitation " + id_text(id) + " is not open (" + std::string(to_string(inv.status)) + ")");
    }
    if (response == Response::Pending) protocol_error("a response cannot be Pending");
    auto slot = std::find_if(inv.responses.begin(), inv.responses.end(),
                             [&](const auto& r) { return r.first == member; });
    if (slot == inv.responses.end()) {
        protocol_error("participant " + id_text(member) + " is not a recipient of invitation " + id_text(id));
    }
    if (slot->second != Response::Pending) {
        protocol_error("participant " + id_text(member) + " already responded to invitation " + id_text(id));
    }
    slot->second = response;
    append(ResponseRecorded{id, member, response});

    if (response == Response::Declined) {
        inv.status = InvitationStatus::Rejected;
        return;
    }
    if (!inv.all_accepted()) return;

    inv.status = InvitationStatus::Merged;
    const std::uint32_t sender_gid = group_id_of_.at(inv.sender);
    const std::uint32_t target_gid = group_id_of_.at(inv.target);
    std::vector<ParticipantId> merged = groups_.at(sender_gid);
    const auto& other = groups_.at(target_gid);
    merged.insert(merged.end(), other.begin(), other.end());
    groups_.erase(sender_gid);
    groups_.erase(target_gid);
    const std::uint32_t gid = add_group(std::move(merged));
    const auto& members = groups_.at(gid);
    void_touching(members, id);
    append(GroupsMerged{id, members});
}

void AssemblyState::leave_group(ParticipantId member) {
    require_live();
    const std::uint32_t gid = group_id_of_.count(member) ? group_id_of_.at(member) : 0;
    const auto& old_group = group_of(member);
    if (old_group.size() < 2) return;

    void_touching(old_group);
    std::vector<ParticipantId> rest;
    for (auto id : old_group) {
        if (id != member) rest.push_back(id);
    }
    groups_.erase(gid);
    add_group(std::move(rest));
    add_group({member});
    append(MemberLeft{member});
}

void AssemblyState::adopt_partition(const Partition& partition, std::size_t team_size) {
    for (const auto& [gid, members] : groups_) {
        if (members.size() != team_size) continue;
        const bool kept = std::any_of(partition.teams.begin(), partition.teams.end(),
                                      [&](const Team& t) { return t.members == members; });
        if (!kept) protocol_error("deadline fill split a full group");
    }
    std::vector<ParticipantId> covered;
    for (const auto& t : partition.teams) {
        if (t.members.empty() || t.members.size() > team_size) protocol_error("deadline fill team of bad size");
        covered.insert(covered.end(), t.members.begin(), t.members.end());
    }
    covered.insert(covered.end(), partition.solos.begin(), partition.solos.end());
    std::sort(covered.begin(), covered.end());
    if (covered != participants_) protocol_error("deadline fill does not cover the session exactly once");

    for (auto& inv : invitations_) {
        if (inv.status == InvitationStatus::Open) inv.status = InvitationStatus::Expired;
    }
    groups_.clear();
    group_id_of_.clear();
    for (const auto& t : partition.teams) add_group(t.members);
    for (auto id : partition.solos) add_group({id});
    finalized_ = true;
    append(DeadlineFill{partition});
}

Partition AssemblyState::finalize(Rng& rng, std::size_t team_size) {
    require_live();
    require(team_size >= 1 && team_size <= kMaxTeamSize, ErrorCategory::InvalidInput, "bad team size");
    Partition out;
    std::vector<ParticipantId> pool;
    for (const auto& [gid, members] : groups_) {
        if (members.size() == team_size) {
            out.teams.push_back({members});
        } else {
            pool.insert(pool.end(), members.begin(), members.end());
        }
    }
    std::sort(pool.begin(), pool.end());
    rng.shuffle(pool.begin(), pool.end());
    const std::size_t packed = pool.size() / team_size;
    for (std::size_t t = 0; t < packed; ++t) {
        Team team;
        team.members.assign(pool.begin() + static_cast<std::ptrdiff_t>(t * team_size),
                            pool.begin() + static_cast<std::ptrdiff_t>((t + 1) * team_size));
        out.teams.push_back(std::move(team));
    }
    out.solos.assign(pool.begin() + static_cast<std::ptrdiff_t>(packed * team_size), pool.end());
    out = canonical(std::move(out));
    adopt_partition(out, team_size);
    return out;
}

void AssemblyState::assign(const Partition& partition, std::size_t team_size) {
    require_live();
    require(team_size >= 1 && team_size <= kMaxTeamSize, ErrorCategory::InvalidInput, "bad team size");
    adopt_partition(canonical(partition), team_size);
}

void AssemblyState::log_query(const Query& query) {
    require_live();
    append(QueryIssued{query.searcher, query.criteria});
}

void AssemblyState::log_recommendations(ParticipantId searcher, std::span<const Recommendation> shown) {
    require_live();
    RecommendationsShown event{searcher, {}};
    for (const auto& r : shown) {
        event.items.push_back({r.candidate, static_cast<std::uint32_t>(r.rank), r.fit_score, r.diversity_score,
                               r.combined_score});
    }
    append(std::move(event));
}

std::optional<std::string> AssemblyState::invariant_violation() const {
    std::unordered_set<ParticipantId> seen;
    for (const auto& [gid, members] : groups_) {
        if (members.empty() || members.size() > kMaxTeamSize) {
            return "group " + std::to_string(gid) + " has size " + std::to_string(members.size());
        }
        for (auto id : members) {
            if (!seen.insert(id).second) return "participant " + id_text(id) + " in two groups";
            auto it = group_id_of_.find(id);
            if (it == group_id_of_.end() || it->second != gid) return "stale group index for " + id_text(id);
        }
    }
    if (seen.size() != participants_.size()) return "groups do not cover the session";

    std::size_t merged = 0;
    for (const auto& inv : invitations_) {
        if (inv.status == InvitationStatus::Merged) {
            ++merged;
            if (!inv.all_accepted()) return "invitation " + id_text(inv.id) + " merged without full acceptance";
        }
        if (inv.status != InvitationStatus::Open) continue;
        if (finalized_) return "open invitation after finalize";
        if (group_of(inv.sender) != inv.sender_group || group_of(inv.target) != inv.recipient_group) {
            return "open invitation " + id_text(inv.id) + " has a stale snapshot";
        }
        if (inv.sender_group.size() + inv.recipient_group.size() > kMaxTeamSize) {
            return "open invitation " + id_text(inv.id) + " would exceed team size";
        }
        for (const auto& other : invitations_) {
            if (other.id != inv.id && other.status == InvitationStatus::Open &&
                same_pair(other, inv.sender_group, inv.recipient_group)) {
                return "duplicate open invitations " + id_text(inv.id) + " and " + id_text(other.id);
            }
        }
    }

    std::size_t merge_events = 0;
    std::uint32_t last_round = 0;
    for (const auto& e : log_) {
        if (e.round < last_round) return "event log rounds decrease";
        last_round = e.round;
        if (e.kind() == EventKind::GroupsMerged) ++merge_events;
    }
    if (merge_events != merged) return "merged invitations do not match GroupsMerged events";
    return std::nullopt;
}

AssemblyState AssemblyState::replay(std::span<const ParticipantId> participants, std::span<const Event> log) {
    AssemblyState state(participants);
    std::size_t i = 0;
    while (i < log.size()) {
        const Event& event = log[i];
        if (event.round < state.round_) protocol_error("event " + std::to_string(i) + ": round goes backwards");
        while (state.round_ < event.round) state.advance_round();

        const std::size_t before = state.log_.size();
        std::visit(
            [&](const auto& p) {
                using T = std::decay_t<decltype(p)>;
                if constexpr (std::is_same_v<T, QueryIssued>) {
                    state.append(p);
                } else if constexpr (std::is_same_v<T, RecommendationsShown>) {
                    state.append(p);
                } else if constexpr (std::is_same_v<T, InvitationSent>) {
                    const auto id = state.send_invitation(p.sender, p.target);
                    if (id != p.invitation) protocol_error("event " + std::to_string(i) + ": invitation id mismatch");
                } else if constexpr (std::is_same_v<T, ResponseRecorded>) {
                    state.respond(p.invitation, p.member, p.response);
                } else if constexpr (std::is_same_v<T, GroupsMerged>) {
                    protocol_error("event " + std::to_string(i) + ": merge without a completing response");
                } else if constexpr (std::is_same_v<T, MemberLeft>) {
                    state.leave_group(p.member);
                } else if constexpr (std::is_same_v<T, DeadlineFill>) {
                    state.require_live();
                    state.adopt_partition(p.partition, kMaxTeamSize);
                }
            },
            event.payload);

        // A command may emit follow-up events (a merge after the last acceptance);
        // they must match the log verbatim.
        const std::size_t produced = state.log_.size() - before;
        if (produced == 0) protocol_error("event " + std::to_string(i) + ": had no effect");
        for (std::size_t k = 0; k < produced; ++k) {
            if (i + k >= log.size() || !(state.log_[before + k] == log[i + k])) {
                protocol_error("event " + std::to_string(i + k) + ": log diverges from replayed state");
            }
        }
        i += produced;
    }
    return state;
}

bool operator==(const AssemblyState& a, const AssemblyState& b) {
    return a.participants_ == b.participants_ && a.groups() == b.groups() && a.invitations_ == b.invitations_ &&
           a.log_ == b.log_ && a.round_ == b.round_ && a.finalized_ == b.finalized_;
}

}  // namespace teamform
