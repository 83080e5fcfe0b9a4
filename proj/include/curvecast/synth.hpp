#ifndef CURVECAST_SYNTH_HPP
#define CURVECAST_SYNTH_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvecast/events.hpp"
#include "curvecast/rng.hpp"

namespace curvecast {

// Generator channels. Call and SMS direction are separate channels so effects
// can target, say, missed calls alone.
enum class EventChannel : int {
  call_incoming,
  call_outgoing,
  call_missed,
  sms_in,
  sms_out,
  bluetooth,
  wifi_scan,
  cell_tower,
  app_install,
  app_uninstall,
  running_apps,
  alarm_set,
  alarm_snooze,
  search,
  bookmark,
};

constexpr int kChannelCount = 15;

inline const std::array<std::string_view, kChannelCount>& channel_names() {
  static const std::array<std::string_view, kChannelCount> names = {
      "call_incoming", "call_outgoing", "call_missed", "sms_in",       "sms_out",
      "bluetooth",     "wifi_scan",     "cell_tower",  "app_install",  "app_uninstall",
      "running_apps",  "alarm_set",     "alarm_snooze", "search",      "bookmark"};
  return names;
}

inline std::string_view channel_name(EventChannel ch) {
  return channel_names()[static_cast<int>(ch)];
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline EventChannel channel_from_name(std::string_view name) {
  for (int i = 0; i < kChannelCount; ++i)
    if (channel_names()[i] == name) return static_cast<EventChannel>(i);
  throw ConfigError("unknown event channel '" + std::string(name) + "'");
}

// Attribute predicates for the effect table, one positive and one negative
// form per attribute.
inline const std::vector<std::string>& effect_predicates() {
  static const std::vector<std::string> preds = {
      "female",   "male",        "over_30",  "under_30",      "has_children",
      "no_children", "student",  "not_student", "us_native",  "non_us_native"};
  return preds;
}

inline bool predicate_matches(const ParticipantProfile& truth, const std::string& pred) {
  if (pred == "female") return truth.gender == Gender::female;
  if (pred == "male") return truth.gender == Gender::male;
  if (pred == "over_30") return truth.age_over_30 == true;
  if (pred == "under_30") return truth.age_over_30 == false;
  if (pred == "has_children") return truth.has_children == true;
  if (pred == "no_children") return truth.has_children == false;
  if (pred == "student") return truth.is_student == true;
  if (pred == "not_student") return truth.is_student == false;
  if (pred == "us_native") return truth.us_native == true;
  if (pred == "non_us_native") return truth.us_native == false;
  throw ConfigError("unknown effect predicate '" + pred + "'");
}

inline std::map<std::string, double> default_ethnicity_weights() {
  return {{"asian", 0.4}, {"white", 0.4}, {"mideast", 0.2}};
}

inline std::map<std::string, double> default_attribute_priors() {
  return {{"female", 0.5},
          {"over_30", 0.4},
          {"has_children", 0.45},
          {"student", 0.35},
          {"us_native", 0.6}};
}

inline std::array<double, kChannelCount> default_rate_table() {
  std::array<double, kChannelCount> r{};
  r[static_cast<int>(EventChannel::call_incoming)] = 2.0;
  r[static_cast<int>(EventChannel::call_outgoing)] = 2.0;
  r[static_cast<int>(EventChannel::call_missed)] = 0.7;
  r[static_cast<int>(EventChannel::sms_in)] = 1.0;
  r[static_cast<int>(EventChannel::sms_out)] = 1.0;
  r[static_cast<int>(EventChannel::bluetooth)] = 25.0;
  r[static_cast<int>(EventChannel::wifi_scan)] = 10.0;
  r[static_cast<int>(EventChannel::cell_tower)] = 8.0;
  r[static_cast<int>(EventChannel::app_install)] = 0.5;
  r[static_cast<int>(EventChannel::app_uninstall)] = 0.2;
  r[static_cast<int>(EventChannel::running_apps)] = 6.0;
  r[static_cast<int>(EventChannel::alarm_set)] = 1.0;
  r[static_cast<int>(EventChannel::alarm_snooze)] = 0.5;
  r[static_cast<int>(EventChannel::search)] = 3.0;
  r[static_cast<int>(EventChannel::bookmark)] = 0.5;
  return r;
}

// Magnitudes are generator knobs tuned so the downstream tasks are learnable
// but not instantly saturated; only the directions are meaningful.
inline std::map<std::pair<std::string, EventChannel>, double> default_effect_table() {
  return {{{"female", EventChannel::search}, 0.6},
          {{"non_us_native", EventChannel::sms_in}, 0.5},
          {{"non_us_native", EventChannel::sms_out}, 0.5},
          {{"has_children", EventChannel::call_missed}, 1.8},
          {{"has_children", EventChannel::app_install}, 0.6},
          {{"over_30", EventChannel::search}, 0.7},
          {{"student", EventChannel::running_apps}, 1.3}};
}

struct CommunityConfig {
  int n_couples = 70;
  int days = 30;
  std::uint64_t seed = 42;
  std::map<std::string, double> ethnicity_weights = default_ethnicity_weights();
  std::map<std::string, double> attribute_priors = default_attribute_priors();
  std::array<double, kChannelCount> rate_table = default_rate_table();
  std::map<std::pair<std::string, EventChannel>, double> effect_table = default_effect_table();
  double partner_proximity_boost = 5.0;
  double ethnic_sms_homophily = 4.0;
  double couple_same_ethnicity_prob = 0.8;
  double attribute_known_prob = 0.85;  // chance an attribute survives into the public profile
  double out_of_study_peer_prob = 0.1;
};

inline void validate_config(const CommunityConfig& cfg) {
  if (cfg.n_couples < 1) throw ConfigError("n_couples must be >= 1");
  if (cfg.days < 1) throw ConfigError("days must be >= 1");
  double wsum = 0.0;
  for (const auto& [label, w] : cfg.ethnicity_weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) throw ConfigError("bad ethnicity weight for " + label);
    wsum += w;
  }
  if (std::abs(wsum - 1.0) > 1e-9) throw ConfigError("ethnicity weights must sum to 1");
  for (const auto& pred : {"female", "over_30", "has_children", "student", "us_native"}) {
    auto it = cfg.attribute_priors.find(pred);
    if (it == cfg.attribute_priors.end()) throw ConfigError(std::string("missing prior ") + pred);
    if (!(it->second >= 0.0 && it->second <= 1.0))
      throw ConfigError(std::string("prior out of range: ") + pred);
  }
  for (double r : cfg.rate_table)
    if (!(r >= 0.0) || !std::isfinite(r)) throw ConfigError("rates must be finite and >= 0");
  for (const auto& [key, f] : cfg.effect_table) {
    if (!(f > 0.0) || !std::isfinite(f))
      throw ConfigError("effect factor must be positive: " + key.first);
    bool known = false;
    for (const auto& p : effect_predicates()) known = known || p == key.first;
    if (!known) throw ConfigError("unknown effect predicate '" + key.first + "'");
  }
  if (!(cfg.partner_proximity_boost >= 1.0)) throw ConfigError("proximity boost must be >= 1");
  if (!(cfg.ethnic_sms_homophily >= 1.0)) throw ConfigError("sms homophily must be >= 1");
  if (!(cfg.couple_same_ethnicity_prob >= 0.0 && cfg.couple_same_ethnicity_prob <= 1.0))
    throw ConfigError("couple ethnicity probability out of range");
  if (!(cfg.attribute_known_prob >= 0.0 && cfg.attribute_known_prob <= 1.0))
    throw ConfigError("attribute known probability out of range");
  if (!(cfg.out_of_study_peer_prob >= 0.0 && cfg.out_of_study_peer_prob <= 1.0))
    throw ConfigError("out-of-study peer probability out of range");
}

struct SyntheticCommunity {
  std::vector<ParticipantProfile> profiles;  // censored public view, sorted by id
  std::vector<ParticipantProfile> truth;     // every attribute known, same order
  std::map<ParticipantId, std::array<double, kChannelCount>> behavior;
  std::map<ParticipantId, std::vector<PeerHash>> contacts;  // out-of-study contact lists
};

namespace detail {

inline std::string participant_id(int number, int width) {
  std::string digits = std::to_string(number);
  if (static_cast<int>(digits.size()) < width)
    digits.insert(0, static_cast<std::size_t>(width) - digits.size(), '0');
  return "p" + digits;
}

inline std::string peer_hash(std::uint64_t bits) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "h_%012llx",
                static_cast<unsigned long long>(bits & 0xffffffffffffULL));
  return buf;
}

inline std::string draw_label(Rng& rng, const std::map<std::string, double>& weights) {
  double r = rng.uniform();
  double cum = 0.0;
  for (const auto& [label, w] : weights) {
    cum += w;
    if (r < cum) return label;
  }
  return weights.rbegin()->first;  // guard against rounding at the top end
}

}  // namespace detail

inline SyntheticCommunity generate_community(const CommunityConfig& cfg) {
  validate_config(cfg);
  SyntheticCommunity comm;
  const int n = 2 * cfg.n_couples;
  const int width = std::max<int>(3, static_cast<int>(std::to_string(n).size()));
  Rng rng(mix_seed(cfg.seed, "community"));

  const auto& priors = cfg.attribute_priors;
  for (int k = 0; k < cfg.n_couples; ++k) {
    ParticipantProfile a, b;
    a.id = detail::participant_id(2 * k + 1, width);
    b.id = detail::participant_id(2 * k + 2, width);
    a.partner = b.id;
    b.partner = a.id;
    for (ParticipantProfile* p : {&a, &b}) {
      p->gender = rng.uniform() < priors.at("female") ? Gender::female : Gender::male;
      p->age_over_30 = rng.uniform() < priors.at("over_30");
      p->has_children = rng.uniform() < priors.at("has_children");
      p->is_student = rng.uniform() < priors.at("student");
      p->us_native = rng.uniform() < priors.at("us_native");
    }
    a.ethnicity = detail::draw_label(rng, cfg.ethnicity_weights);
    // sharing with probability q, otherwise an independent draw, keeps the
    // marginal label distribution intact
    b.ethnicity = rng.uniform() < cfg.couple_same_ethnicity_prob
                      ? a.ethnicity
                      : detail::draw_label(rng, cfg.ethnicity_weights);
    comm.truth.push_back(a);
    comm.truth.push_back(b);
  }

  // censored public profiles; partners stay visible so couple scoring has truth
  Rng censor(mix_seed(cfg.seed, "censor"));
  for (const auto& t : comm.truth) {
    ParticipantProfile pub = t;
    if (censor.uniform() >= cfg.attribute_known_prob) pub.gender.reset();
    if (censor.uniform() >= cfg.attribute_known_prob) pub.age_over_30.reset();
    if (censor.uniform() >= cfg.attribute_known_prob) pub.has_children.reset();
    if (censor.uniform() >= cfg.attribute_known_prob) pub.is_student.reset();
    if (censor.uniform() >= cfg.attribute_known_prob) pub.us_native.reset();
    if (censor.uniform() >= cfg.attribute_known_prob) pub.ethnicity.reset();
    comm.profiles.push_back(pub);
  }

  for (const auto& t : comm.truth) {
    std::array<double, kChannelCount> rates{};
    for (int ch = 0; ch < kChannelCount; ++ch) {
      double r = cfg.rate_table[ch];
      for (const auto& [key, factor] : cfg.effect_table)
        if (key.second == static_cast<EventChannel>(ch) && predicate_matches(t, key.first))
          r *= factor;
      rates[ch] = r;
    }
    comm.behavior[t.id] = rates;
  }

  // out-of-study contact pool sized 3n so that hash reuse across participants
  // is common but not universal
  std::vector<PeerHash> pool;
  for (int i = 0; i < 3 * n; ++i)
    pool.push_back(detail::peer_hash(mix_seed(cfg.seed, "hashpool", static_cast<std::uint64_t>(i))));
  Rng contact_rng(mix_seed(cfg.seed, "contacts"));
  for (const auto& t : comm.truth) {
    std::set<PeerHash> chosen;
    while (chosen.size() < 3) chosen.insert(pool[contact_rng.uniform_index(pool.size())]);
    comm.contacts[t.id] = std::vector<PeerHash>(chosen.begin(), chosen.end());
  }
  return comm;
}

namespace detail {

struct PeerPools {
  std::vector<ParticipantId> others;        // everyone else, id order
  std::vector<ParticipantId> same_eth;      // subset sharing true ethnicity
  std::vector<ParticipantId> diff_eth;
  std::vector<ParticipantId> non_partner;   // others minus the partner
  ParticipantId partner;
};

inline ParticipantId pick_uniform(Rng& rng, const std::vector<ParticipantId>& v) {
  return v[rng.uniform_index(v.size())];
}

inline PeerHash pick_call_sms_peer(Rng& rng, const CommunityConfig& cfg, const PeerPools& pools,
                                   const std::vector<PeerHash>& contacts, bool homophilous) {
  if (rng.uniform() < cfg.out_of_study_peer_prob) return contacts[rng.uniform_index(contacts.size())];
  if (!homophilous || pools.same_eth.empty() || pools.diff_eth.empty())
    return pick_uniform(rng, pools.others);
  const double h = cfg.ethnic_sms_homophily;
  const double total = h * static_cast<double>(pools.same_eth.size()) +
                       static_cast<double>(pools.diff_eth.size());
  const double r = rng.uniform() * total;
  if (r < h * static_cast<double>(pools.same_eth.size()))
    return pools.same_eth[static_cast<std::size_t>(r / h)];
  return pools.diff_eth[static_cast<std::size_t>(r - h * static_cast<double>(pools.same_eth.size()))];
}

inline ParticipantId pick_bluetooth_peer(Rng& rng, const CommunityConfig& cfg,
                                         const PeerPools& pools) {
  if (pools.non_partner.empty()) return pools.partner;
  const double boost = cfg.partner_proximity_boost;
  const double total = boost + static_cast<double>(pools.non_partner.size());
  if (rng.uniform() * total < boost) return pools.partner;
  return pick_uniform(rng, pools.non_partner);
}

}  // namespace detail

// Independent daily Poisson counts per participant and channel, timestamps
// uniform within the day. Every stream is derived from the config seed, so the
// log is reproducible event for event.
inline EventLog generate_events(const SyntheticCommunity& comm, const CommunityConfig& cfg) {
  validate_config(cfg);
  EventLog log;
  log.participants = comm.profiles;

  std::map<ParticipantId, const ParticipantProfile*> truth_by_id;
  for (const auto& t : comm.truth) truth_by_id[t.id] = &t;

  for (const auto& t : comm.truth) {
    detail::PeerPools pools;
    pools.partner = *t.partner;
    for (const auto& other : comm.truth) {
      if (other.id == t.id) continue;
      pools.others.push_back(other.id);
      if (other.id != pools.partner) pools.non_partner.push_back(other.id);
      if (other.ethnicity == t.ethnicity) pools.same_eth.push_back(other.id);
      else pools.diff_eth.push_back(other.id);
    }
    const auto& contacts = comm.contacts.at(t.id);
    const auto& rates = comm.behavior.at(t.id);

    for (int ch_i = 0; ch_i < kChannelCount; ++ch_i) {
      const auto ch = static_cast<EventChannel>(ch_i);
      const double rate = rates[ch_i];
      if (rate <= 0.0) continue;
      Rng rng(mix_seed(cfg.seed, t.id + "/" + std::string(channel_name(ch))));
      for (int day = 0; day < cfg.days; ++day) {
        const int count = rng.poisson(rate);
        for (int e = 0; e < count; ++e) {
          EventRecord rec;
          rec.time.seconds = static_cast<std::int64_t>(day) * 86400 +
                             static_cast<std::int64_t>(rng.uniform() * 86400.0);
          rec.actor = t.id;
          switch (ch) {
            case EventChannel::call_incoming:
            case EventChannel::call_outgoing:
            case EventChannel::call_missed: {
              CallEvent ev;
              ev.direction = ch == EventChannel::call_incoming  ? CallDirection::incoming
                             : ch == EventChannel::call_outgoing ? CallDirection::outgoing
                                                                 : CallDirection::missed;
              ev.duration_s = ch == EventChannel::call_missed
                                  ? 0
                                  : static_cast<std::int64_t>(rng.uniform(10.0, 600.0));
              ev.peer = detail::pick_call_sms_peer(rng, cfg, pools, contacts, false);
              rec.payload = ev;
              break;
            }
            case EventChannel::sms_in:
            case EventChannel::sms_out: {
              SmsEvent ev;
              ev.direction = ch == EventChannel::sms_in ? SmsDirection::incoming
                                                        : SmsDirection::outgoing;
              ev.peer = detail::pick_call_sms_peer(rng, cfg, pools, contacts, true);
              rec.payload = ev;
              break;
            }
            case EventChannel::bluetooth:
              rec.payload = BluetoothEvent{detail::pick_bluetooth_peer(rng, cfg, pools)};
              break;
            case EventChannel::wifi_scan:
              rec.payload = WifiScanEvent{"net" + std::to_string(rng.uniform_index(30))};
              break;
            case EventChannel::cell_tower:
              rec.payload = CellTowerEvent{"cell" + std::to_string(rng.uniform_index(40))};
              break;
            case EventChannel::app_install:
              rec.payload = AppInstallEvent{"app" + std::to_string(rng.uniform_index(100))};
              break;
            case EventChannel::app_uninstall:
              rec.payload = AppUninstallEvent{"app" + std::to_string(rng.uniform_index(100))};
              break;
            case EventChannel::running_apps:
              rec.payload = RunningAppsEvent{static_cast<std::int64_t>(rng.poisson(8.0))};
              break;
            case EventChannel::alarm_set:
              rec.payload = AlarmEvent{AlarmAction::set};
              break;
            case EventChannel::alarm_snooze:
              rec.payload = AlarmEvent{AlarmAction::snooze};
              break;
            case EventChannel::search:
              rec.payload = SearchEvent{};
              break;
            case EventChannel::bookmark:
              rec.payload = BookmarkEvent{};
              break;
          }
          log.events.push_back(std::move(rec));
        }
      }
    }
  }
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return log;
}

}  // namespace curvecast

#endif  // CURVECAST_SYNTH_HPP
