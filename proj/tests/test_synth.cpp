#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>
#include <sstream>

#include "curvecast/graph.hpp"
#include "curvecast/synth.hpp"

using namespace curvecast;

namespace {

// Default community and log, built once; several sections below inspect it.
const std::pair<SyntheticCommunity, EventLog>& default_run() {
  static const auto data = [] {
    CommunityConfig cfg;
    auto comm = generate_community(cfg);
    auto log = generate_events(comm, cfg);
    return std::make_pair(std::move(comm), std::move(log));
  }();
  return data;
}

struct ActorCounts {
  double searches = 0;
  double missed_calls = 0;
  double installs = 0;
  double sms = 0;
  double app_snapshots = 0;
};

std::map<ParticipantId, ActorCounts> count_by_actor(const EventLog& log) {
  std::map<ParticipantId, ActorCounts> out;
  for (const auto& ev : log.events) {
    auto& c = out[ev.actor];
    if (std::holds_alternative<SearchEvent>(ev.payload)) c.searches += 1;
    if (const auto* call = std::get_if<CallEvent>(&ev.payload))
      if (call->direction == CallDirection::missed) c.missed_calls += 1;
    if (std::holds_alternative<AppInstallEvent>(ev.payload)) c.installs += 1;
    if (std::holds_alternative<SmsEvent>(ev.payload)) c.sms += 1;
    if (std::holds_alternative<RunningAppsEvent>(ev.payload)) c.app_snapshots += 1;
  }
  return out;
}

// Mean of a per-actor statistic over the participants matching / not matching
// a predicate on the true attributes.
std::pair<double, double> group_means(const SyntheticCommunity& comm, const EventLog& log,
                                      double ActorCounts::* field,
                                      bool (*pred)(const ParticipantProfile&)) {
  auto counts = count_by_actor(log);
  double sum_t = 0, n_t = 0, sum_f = 0, n_f = 0;
  for (const auto& t : comm.truth) {
    const double v = counts[t.id].*field;
    if (pred(t)) {
      sum_t += v;
      n_t += 1;
    } else {
      sum_f += v;
      n_f += 1;
    }
  }
  REQUIRE(n_t > 0);
  REQUIRE(n_f > 0);
  return {sum_t / n_t, sum_f / n_f};
}

}  // namespace

TEST_CASE("smallest community is one mutual couple") {
  CommunityConfig cfg;
  cfg.n_couples = 1;
  cfg.days = 2;
  auto comm = generate_community(cfg);
  REQUIRE(comm.profiles.size() == 2);
  REQUIRE(comm.truth.size() == 2);
  CHECK(comm.profiles[0].partner == comm.profiles[1].id);
  CHECK(comm.profiles[1].partner == comm.profiles[0].id);

  // with only two people every bluetooth sighting is of the partner
  auto log = generate_events(comm, cfg);
  for (const auto& ev : log.events)
    if (const auto* bt = std::get_if<BluetoothEvent>(&ev.payload)) {
      const auto& partner = ev.actor == comm.truth[0].id ? comm.truth[1].id : comm.truth[0].id;
      CHECK(bt->peer_device == partner);
    }
}

TEST_CASE("generation is reproducible byte for byte") {
  CommunityConfig cfg;
  cfg.n_couples = 10;
  cfg.days = 3;
  cfg.seed = 1234;

  auto render = [](const CommunityConfig& c) {
    auto comm = generate_community(c);
    auto log = generate_events(comm, c);
    std::string out;
    for (const auto& p : log.participants) out += serialize_profile(p) + "\n";
    for (const auto& ev : log.events) out += serialize_event(ev) + "\n";
    return out;
  };

  const std::string first = render(cfg);
  const std::string second = render(cfg);
  REQUIRE(first == second);

  cfg.seed = 1235;
  CHECK(render(cfg) != first);
}

TEST_CASE("ethnicity frequencies track the configured weights") {
  CommunityConfig cfg;
  cfg.days = 1;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    cfg.seed = seed;
    auto comm = generate_community(cfg);
    std::map<std::string, double> freq;
    for (const auto& t : comm.truth) freq[*t.ethnicity] += 1.0 / comm.truth.size();
    for (const auto& [label, w] : cfg.ethnicity_weights) {
      INFO("seed " << seed << " label " << label);
      CHECK(std::abs(freq[label] - w) <= 0.15);
    }
  }
}

TEST_CASE("couples share ethnicity more often than chance") {
  CommunityConfig cfg;
  cfg.days = 1;
  int same = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    auto comm = generate_community(cfg);
    for (int k = 0; k < cfg.n_couples; ++k)
      if (comm.truth[2 * k].ethnicity == comm.truth[2 * k + 1].ethnicity) ++same;
  }
  // q + (1-q) * sum w^2 = 0.8 + 0.2 * 0.36 = 0.872 expected share
  const double share = static_cast<double>(same) / (5.0 * cfg.n_couples);
  CHECK(share > 0.75);
  CHECK(share < 0.97);
}

TEST_CASE("zero rates produce an empty log") {
  CommunityConfig cfg;
  cfg.n_couples = 4;
  cfg.days = 5;
  cfg.rate_table.fill(0.0);
  cfg.effect_table.clear();
  auto comm = generate_community(cfg);
  auto log = generate_events(comm, cfg);
  CHECK(log.events.empty());
  CHECK(log.participants.size() == 8);
}

TEST_CASE("realized rates are base rates scaled by matching effects") {
  auto& [comm, log] = default_run();
  CommunityConfig cfg;
  const ParticipantProfile* pick = nullptr;
  for (const auto& t : comm.truth)
    if (t.gender == Gender::female && t.age_over_30 == true) pick = &t;
  REQUIRE(pick != nullptr);
  const auto& rates = comm.behavior.at(pick->id);
  // search: 3.0 base, x0.6 female, x0.7 over 30
  CHECK_THAT(rates[static_cast<int>(EventChannel::search)],
             Catch::Matchers::WithinAbs(3.0 * 0.6 * 0.7, 1e-12));
  // bluetooth has no effects attached
  CHECK(rates[static_cast<int>(EventChannel::bluetooth)] == 25.0);

  const ParticipantProfile* parent = nullptr;
  for (const auto& t : comm.truth)
    if (t.has_children == true) parent = &t;
  REQUIRE(parent != nullptr);
  const auto& prates = comm.behavior.at(parent->id);
  CHECK_THAT(prates[static_cast<int>(EventChannel::call_missed)],
             Catch::Matchers::WithinAbs(0.7 * 1.8, 1e-12));
  CHECK_THAT(prates[static_cast<int>(EventChannel::app_install)],
             Catch::Matchers::WithinAbs(0.5 * 0.6, 1e-12));
}

TEST_CASE("behavioral effects point the configured way") {
  CommunityConfig cfg;
  cfg.days = 10;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    cfg.seed = seed;
    auto comm = generate_community(cfg);
    auto log = generate_events(comm, cfg);
    INFO("seed " << seed);

    auto [f, m] = group_means(comm, log, &ActorCounts::searches,
                              [](const ParticipantProfile& p) { return p.gender == Gender::female; });
    CHECK(f < m);

    auto [native, foreign] = group_means(comm, log, &ActorCounts::sms,
                                         [](const ParticipantProfile& p) { return p.us_native == true; });
    CHECK(foreign < native);

    auto [parent_miss, other_miss] =
        group_means(comm, log, &ActorCounts::missed_calls,
                    [](const ParticipantProfile& p) { return p.has_children == true; });
    CHECK(parent_miss > other_miss);

    auto [parent_inst, other_inst] =
        group_means(comm, log, &ActorCounts::installs,
                    [](const ParticipantProfile& p) { return p.has_children == true; });
    CHECK(parent_inst < other_inst);

    auto [old_search, young_search] =
        group_means(comm, log, &ActorCounts::searches,
                    [](const ParticipantProfile& p) { return p.age_over_30 == true; });
    CHECK(old_search < young_search);

    auto [stud, nonstud] = group_means(comm, log, &ActorCounts::app_snapshots,
                                       [](const ParticipantProfile& p) { return p.is_student == true; });
    CHECK(stud > nonstud);
  }
}

TEST_CASE("partner proximity dominates the bluetooth graph") {
  auto& [comm, log] = default_run();
  auto g = build_bluetooth_graph(log, TimeWindow{{0}, {30 * 86400}});
  int correct = 0, total = 0;
  for (const auto& p : comm.truth) {
    auto pred = predict_significant_other(g, p.id);
    ++total;
    if (pred.node && *pred.node == *p.partner && !pred.tie) ++correct;
  }
  REQUIRE(total == 140);
  CHECK(static_cast<double>(correct) / total >= 0.9);
}

TEST_CASE("timestamps stay inside the configured horizon and arrive sorted") {
  auto& [comm, log] = default_run();
  REQUIRE(!log.events.empty());
  std::int64_t prev = 0;
  for (const auto& ev : log.events) {
    REQUIRE(ev.time.seconds >= 0);
    REQUIRE(ev.time.seconds < 30 * 86400);
    REQUIRE(ev.time.seconds >= prev);
    prev = ev.time.seconds;
  }
}

TEST_CASE("some peers fall outside the study and hashes are shared") {
  auto& [comm, log] = default_run();
  std::map<PeerHash, std::set<ParticipantId>> seen_by;
  std::size_t in_study_peers = 0, out_peers = 0;
  for (const auto& ev : log.events) {
    PeerHash peer;
    if (const auto* call = std::get_if<CallEvent>(&ev.payload)) peer = call->peer;
    else if (const auto* sms = std::get_if<SmsEvent>(&ev.payload)) peer = sms->peer;
    else continue;
    if (peer.rfind("h_", 0) == 0) {
      REQUIRE(peer.size() == 14);
      REQUIRE(peer.find_first_not_of("0123456789abcdef", 2) == std::string::npos);
      seen_by[peer].insert(ev.actor);
      ++out_peers;
    } else {
      REQUIRE(log.has_participant(peer));
      ++in_study_peers;
    }
  }
  REQUIRE(out_peers > 0);
  REQUIRE(in_study_peers > 0);
  // about one contact in ten goes outside the study
  const double frac = static_cast<double>(out_peers) / (out_peers + in_study_peers);
  CHECK(frac > 0.05);
  CHECK(frac < 0.2);
  int shared = 0;
  for (const auto& [hash, actors] : seen_by)
    if (actors.size() >= 2) ++shared;
  CHECK(shared > 0);
}

TEST_CASE("public profiles are censored but truthful") {
  auto& [comm, log] = default_run();
  REQUIRE(comm.profiles.size() == comm.truth.size());
  int unknown = 0;
  for (std::size_t i = 0; i < comm.profiles.size(); ++i) {
    const auto& pub = comm.profiles[i];
    const auto& t = comm.truth[i];
    REQUIRE(pub.id == t.id);
    REQUIRE(pub.partner == t.partner);
    REQUIRE(t.gender.has_value());
    REQUIRE(t.ethnicity.has_value());
    for (bool known : {pub.gender.has_value(), pub.age_over_30.has_value(),
                       pub.has_children.has_value(), pub.is_student.has_value(),
                       pub.us_native.has_value(), pub.ethnicity.has_value()})
      if (!known) ++unknown;
    if (pub.gender) CHECK(pub.gender == t.gender);
    if (pub.age_over_30) CHECK(pub.age_over_30 == t.age_over_30);
    if (pub.ethnicity) CHECK(pub.ethnicity == t.ethnicity);
  }
  // 840 attribute slots at 15% censoring; allow a wide band
  CHECK(unknown > 60);
  CHECK(unknown < 220);
}

TEST_CASE("sms peers lean toward the actor's own ethnicity") {
  auto& [comm, log] = default_run();
  std::map<ParticipantId, std::string> eth;
  for (const auto& t : comm.truth) eth[t.id] = *t.ethnicity;
  int same = 0, cross = 0;
  for (const auto& ev : log.events) {
    const auto* sms = std::get_if<SmsEvent>(&ev.payload);
    if (!sms || !eth.count(sms->peer)) continue;
    if (eth[ev.actor] == eth[sms->peer]) ++same;
    else ++cross;
  }
  REQUIRE(same + cross > 1000);
  // mixing weights 0.4/0.4/0.2 give ~0.34 same-ethnicity pairs at random;
  // homophily 4 should push that well past one half
  CHECK(static_cast<double>(same) / (same + cross) > 0.5);
}

TEST_CASE("bad configurations are rejected") {
  CommunityConfig cfg;
  cfg.ethnicity_weights = {{"a", 0.7}, {"b", 0.2}};
  CHECK_THROWS_AS(generate_community(cfg), ConfigError);

  cfg = CommunityConfig{};
  cfg.rate_table[0] = -1.0;
  CHECK_THROWS_AS(generate_community(cfg), ConfigError);

  cfg = CommunityConfig{};
  cfg.effect_table[{"left_handed", EventChannel::search}] = 2.0;
  CHECK_THROWS_AS(generate_community(cfg), ConfigError);

  cfg = CommunityConfig{};
  cfg.partner_proximity_boost = 0.5;
  CHECK_THROWS_AS(generate_community(cfg), ConfigError);

  cfg = CommunityConfig{};
  cfg.n_couples = 0;
  CHECK_THROWS_AS(generate_community(cfg), ConfigError);

  CHECK_THROWS_AS(channel_from_name("pigeon_post"), ConfigError);
}
