#include <gtest/gtest.h>

#include <set>
#include <sstream>

#include "fixtures.hpp"
#include "teamform/error.hpp"
#include "teamform/event_io.hpp"
#include "teamform/protocol.hpp"

using namespace teamform;

namespace {

std::vector<ParticipantId> ids(std::uint32_t n) {
    std::vector<ParticipantId> out;
    for (std::uint32_t i = 1; i <= n; ++i) out.push_back(participant_id(i));
    return out;
}

ParticipantId P(std::uint32_t i) { return participant_id(i); }

// Invites and accepts until `members` form one group.
void join(AssemblyState& s, std::vector<std::uint32_t> members) {
    for (std::size_t i = 1; i < members.size(); ++i) {
        const auto inv = s.send_invitation(P(members[0]), P(members[i]));
        s.respond(inv, P(members[i]), Response::Accepted);
    }
}

// Checks the protocol invariants independently of AssemblyState::invariant_violation.
void check_invariants(const AssemblyState& s) {
    std::set<ParticipantId> seen;
    for (const auto& g : s.groups()) {
        ASSERT_GE(g.size(), 1u);
        ASSERT_LE(g.size(), kMaxTeamSize);
        for (auto id : g) ASSERT_TRUE(seen.insert(id).second) << "participant in two groups";
    }
    ASSERT_EQ(seen.size(), s.participants().size());
    std::set<std::pair<std::vector<ParticipantId>, std::vector<ParticipantId>>> open_pairs;
    for (const auto& inv : s.invitations()) {
        if (inv.status == InvitationStatus::Merged) {
            for (const auto& [member, r] : inv.responses) ASSERT_EQ(r, Response::Accepted);
        }
        if (inv.status == InvitationStatus::Rejected) {
            ASSERT_TRUE(std::any_of(inv.responses.begin(), inv.responses.end(),
                                    [](const auto& r) { return r.second == Response::Declined; }));
        }
        if (inv.status != InvitationStatus::Open) continue;
        ASSERT_LE(inv.sender_group.size() + inv.recipient_group.size(), kMaxTeamSize);
        ASSERT_EQ(s.group_of(inv.sender), inv.sender_group);
        ASSERT_EQ(s.group_of(inv.target), inv.recipient_group);
        auto a = inv.sender_group, b = inv.recipient_group;
        if (b < a) std::swap(a, b);
        ASSERT_TRUE(open_pairs.insert({a, b}).second) << "duplicate open invitation";
    }
    ASSERT_FALSE(s.invariant_violation().has_value()) << *s.invariant_violation();
    std::uint32_t last_round = 0;
    for (const auto& e : s.event_log()) {
        ASSERT_GE(e.round, last_round);
        last_round = e.round;
    }
}

}  // namespace

TEST(Protocol, SoloInvitationIsOpen) {
    AssemblyState s(ids(4));
    const auto inv = s.send_invitation(P(1), P(2));
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Open);
    EXPECT_EQ(s.invitation(inv).recipient_group, std::vector<ParticipantId>{P(2)});
}

TEST(Protocol, OversizedMergeRejected) {
    AssemblyState s(ids(8));
    join(s, {1, 2, 3});
    join(s, {4, 5});
    try {
        s.send_invitation(P(1), P(4));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.category(), ErrorCategory::Protocol);
        EXPECT_STREQ(e.what(), "merge would exceed team size");
    }
    EXPECT_THROW(s.send_invitation(P(1), P(2)), Error);
}

TEST(Protocol, DuplicateInvitationReturnsExistingId) {
    AssemblyState s(ids(4));
    const auto a = s.send_invitation(P(1), P(2));
    const auto log_size = s.event_log().size();
    EXPECT_EQ(s.send_invitation(P(1), P(2)), a);
    EXPECT_EQ(s.send_invitation(P(2), P(1)), a);
    EXPECT_EQ(s.event_log().size(), log_size);
}

TEST(Protocol, SingleRecipientAcceptMerges) {
    AssemblyState s(ids(4));
    const auto inv = s.send_invitation(P(1), P(2));
    s.respond(inv, P(2), Response::Accepted);
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Merged);
    EXPECT_EQ(s.group_size(P(1)), 2u);
    EXPECT_EQ(s.event_log().back().kind(), EventKind::GroupsMerged);
}

TEST(Protocol, AnyDeclineRejects) {
    AssemblyState s(ids(4));
    join(s, {2, 3});
    const auto inv = s.send_invitation(P(1), P(2));
    s.respond(inv, P(2), Response::Accepted);
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Open);
    s.respond(inv, P(3), Response::Declined);
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Rejected);
    EXPECT_EQ(s.group_size(P(1)), 1u);
    EXPECT_THROW(s.respond(inv, P(3), Response::Accepted), Error);
}

TEST(Protocol, IgnoreLeavesInvitationOpenUntilDeadline) {
    AssemblyState s(ids(4));
    const auto inv = s.send_invitation(P(1), P(2));
    s.respond(inv, P(2), Response::Ignored);
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Open);
    Rng rng(1);
    s.finalize(rng);
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Expired);
}

TEST(Protocol, NonRecipientCannotRespond) {
    AssemblyState s(ids(4));
    const auto inv = s.send_invitation(P(1), P(2));
    EXPECT_THROW(s.respond(inv, P(1), Response::Accepted), Error);
    EXPECT_THROW(s.respond(inv, P(3), Response::Accepted), Error);
}

TEST(Protocol, MergeToFullVoidsOtherInvitations) {
    AssemblyState s(ids(8));
    join(s, {1, 2, 3});
    const auto a = s.send_invitation(P(1), P(4));
    const auto b = s.send_invitation(P(5), P(2));
    const auto c = s.send_invitation(P(6), P(7));
    s.respond(a, P(4), Response::Accepted);
    EXPECT_EQ(s.group_size(P(1)), 4u);
    EXPECT_EQ(s.invitation(b).status, InvitationStatus::Voided);
    EXPECT_EQ(s.invitation(c).status, InvitationStatus::Open);
}

TEST(Protocol, LeaveSplitsGroupAndAllowsReinvite) {
    AssemblyState s(ids(6));
    join(s, {1, 2, 3, 4});
    s.leave_group(P(4));
    EXPECT_EQ(s.group_size(P(1)), 3u);
    EXPECT_EQ(s.group_size(P(4)), 1u);
    const auto inv = s.send_invitation(P(4), P(1));
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Open);
    EXPECT_EQ(s.invitation(inv).recipient_group.size(), 3u);
    const auto before = s.event_log().size();
    s.leave_group(P(5));
    EXPECT_EQ(s.event_log().size(), before);
}

TEST(Protocol, LeaveVoidsInvitationsOfOldGroup) {
    AssemblyState s(ids(6));
    join(s, {1, 2});
    const auto inv = s.send_invitation(P(5), P(1));
    s.leave_group(P(2));
    EXPECT_EQ(s.invitation(inv).status, InvitationStatus::Voided);
}

TEST(Finalize, FullGroupsAreKept) {
    AssemblyState s(ids(8));
    join(s, {1, 2, 3, 4});
    join(s, {5, 6, 7, 8});
    Rng rng(3);
    const auto p = s.finalize(rng);
    EXPECT_EQ(p.teams.size(), 2u);
    EXPECT_TRUE(p.solos.empty());
    EXPECT_EQ(p.teams[0].members, (std::vector<ParticipantId>{P(1), P(2), P(3), P(4)}));
    EXPECT_TRUE(s.finalized());
    EXPECT_THROW(s.send_invitation(P(1), P(5)), Error);
}

TEST(Finalize, PacksPartialGroups) {
    AssemblyState s(ids(8));
    join(s, {1, 2, 3, 4});
    join(s, {5, 6, 7});
    Rng rng(3);
    const auto p = s.finalize(rng);
    EXPECT_EQ(p.teams.size(), 2u);
    EXPECT_EQ(p.teams[1].members, (std::vector<ParticipantId>{P(5), P(6), P(7), P(8)}));
}

TEST(Finalize, RemainderBecomesSolos) {
    AssemblyState s(ids(10));
    Rng rng(4);
    const auto p = s.finalize(rng);
    EXPECT_EQ(p.teams.size(), 2u);
    EXPECT_EQ(p.solos.size(), 2u);
}

TEST(Replay, ReproducesFinalState) {
    AssemblyState s(ids(8));
    join(s, {1, 2});
    s.advance_round();
    const auto inv = s.send_invitation(P(3), P(1));
    s.respond(inv, P(1), Response::Accepted);
    s.respond(inv, P(2), Response::Ignored);
    s.leave_group(P(2));
    Rng rng(5);
    s.finalize(rng);
    const auto participants = ids(8);
    const auto replayed = AssemblyState::replay(participants, s.event_log());
    EXPECT_TRUE(replayed == s);
}

TEST(Replay, RejectsTamperedLog) {
    AssemblyState s(ids(4));
    join(s, {1, 2});
    std::vector<Event> log(s.event_log().begin(), s.event_log().end());
    std::get<GroupsMerged>(log.back().payload).members.push_back(P(3));
    const auto participants = ids(4);
    EXPECT_THROW(AssemblyState::replay(participants, log), Error);
    // Dropping the acceptance and the merge leaves a valid prefix with the invitation still open.
    log.pop_back();
    log.pop_back();
    const auto prefix = AssemblyState::replay(participants, log);
    EXPECT_EQ(prefix.open_invitations().size(), 1u);
}

TEST(EventIo, JsonlRoundTrip) {
    AssemblyState s(ids(8));
    Query q{P(1), {{CriterionKind::SkillLevel, Skill::Writing, 2}, {CriterionKind::SameGender, Skill::Campaigns, -1}}};
    s.log_query(q);
    Recommendation r;
    r.candidate = P(2);
    r.rank = 1;
    r.fit_score = 0.1 + 0.2;
    r.diversity_score = 1.0 / 3.0;
    r.combined_score = r.fit_score * r.diversity_score;
    s.log_recommendations(P(1), std::vector<Recommendation>{r});
    join(s, {1, 2, 3});
    s.leave_group(P(3));
    Rng rng(2);
    s.finalize(rng);
    std::istringstream in(to_jsonl(s.event_log()));
    const auto back = events_from_jsonl(in);
    ASSERT_EQ(back.size(), s.event_log().size());
    for (std::size_t i = 0; i < back.size(); ++i) EXPECT_TRUE(back[i] == s.event_log()[i]) << i;
}

TEST(EventIo, RejectsUnknownKind) {
    std::istringstream in("{\"round\":0,\"kind\":\"Teleport\"}\n");
    EXPECT_THROW(events_from_jsonl(in), Error);
}

// Randomized send/respond/leave sequence; every step is checked against the
// invariants, and the whole log must replay to the same state.
TEST(ProtocolFuzz, TenThousandStepsKeepInvariants) {
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        Rng rng(seed);
        const auto participants = ids(24);
        AssemblyState s(participants);
        std::size_t merges = 0, errors = 0;
        for (int step = 0; step < 10000; ++step) {
            const auto action = rng.below(10);
            try {
                if (action < 4) {
                    s.send_invitation(participants[rng.below(24)], participants[rng.below(24)]);
                } else if (action < 8) {
                    const auto open = s.open_invitations();
                    if (open.empty()) continue;
                    const auto& inv = s.invitation(open[rng.below(open.size())]);
                    const auto& [member, resp] = inv.responses[rng.below(inv.responses.size())];
                    const Response choices[] = {Response::Accepted, Response::Accepted, Response::Declined,
                                                Response::Ignored};
                    const auto before = s.group_size(inv.sender);
                    s.respond(inv.id, member, choices[rng.below(4)]);
                    if (s.group_size(member) > before) ++merges;
                } else if (action < 9) {
                    s.leave_group(participants[rng.below(24)]);
                } else {
                    s.advance_round();
                }
            } catch (const Error& e) {
                ASSERT_EQ(e.category(), ErrorCategory::Protocol);
                ++errors;
            }
            check_invariants(s);
            if (::testing::Test::HasFatalFailure()) return;
        }
        Rng fill(seed + 100);
        const auto p = s.finalize(fill);
        EXPECT_GT(merges, 100u);
        EXPECT_GT(errors, 0u);
        const auto replayed = AssemblyState::replay(participants, s.event_log());
        EXPECT_TRUE(replayed == s);
        std::set<ParticipantId> covered;
        for (const auto& t : p.teams) {
            EXPECT_LE(t.size(), kMaxTeamSize);
            covered.insert(t.members.begin(), t.members.end());
        }
        covered.insert(p.solos.begin(), p.solos.end());
        EXPECT_EQ(covered.size(), participants.size());
    }
}
