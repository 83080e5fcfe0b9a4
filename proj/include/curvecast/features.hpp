#ifndef CURVECAST_FEATURES_HPP
#define CURVECAST_FEATURES_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "curvecast/events.hpp"

namespace curvecast {

// The canonical 32-component behavioral feature vector. The enumeration is the
// single source of truth for order and naming; every exported matrix carries it
// as its header so results are self-describing.
enum Feature : int {
  // internet
  kNSearches = 0,
  kNBookmarks,
  // calls
  kNCallsTotal,
  kNCallPeers,
  kCallDurationTotal,
  kNCallsIncoming,
  kNCallsOutgoing,
  kNCallsMissed,
  kDurationIncoming,
  kDurationOutgoing,
  kNPeersIncoming,
  kNPeersOutgoing,
  kNPeersMissed,
  // sms
  kNSmsTotal,
  kNSmsPeers,
  kNSmsIn,
  kNSmsOut,
  kNPeersSmsIn,
  kNPeersSmsOut,
  kSmsInOutRatio,
  // apps
  kNInstalls,
  kNInstallsDistinct,
  kNUninstalls,
  kNUninstallsDistinct,
  kRunningAppsTotal,
  kRunningAppsMean,
  // alarms
  kNAlarmsSet,
  kNSnoozes,
  // location
  kNDistinctCellTowers,
  kNDistinctWifiNames,
  kNCellEvents,
  kNWifiEvents,
  kFeatureCount
};

inline const std::array<std::string_view, kFeatureCount>& feature_names() {
  static const std::array<std::string_view, kFeatureCount> names = {
      "n_searches",          "n_bookmarks",         "n_calls_total",
      "n_call_peers",        "call_duration_total", "n_calls_incoming",
      "n_calls_outgoing",    "n_calls_missed",      "duration_incoming",
      "duration_outgoing",   "n_peers_incoming",    "n_peers_outgoing",
      "n_peers_missed",      "n_sms_total",         "n_sms_peers",
      "n_sms_in",            "n_sms_out",           "n_peers_sms_in",
      "n_peers_sms_out",     "sms_in_out_ratio",    "n_installs",
      "n_installs_distinct", "n_uninstalls",        "n_uninstalls_distinct",
      "running_apps_total",  "running_apps_mean",   "n_alarms_set",
      "n_snoozes",           "n_distinct_cell_towers", "n_distinct_wifi_names",
      "n_cell_events",       "n_wifi_events"};
  return names;
}

using FeatureVector = std::array<double, kFeatureCount>;

// Features that are plain counts/sums, additive across disjoint windows.
// Distinct-peer and distinct-name features are subadditive; the ratio and the
// running-apps mean are derived quantities.
inline const std::vector<int>& additive_features() {
  static const std::vector<int> idx = {
      kNSearches,      kNBookmarks,     kNCallsTotal,      kCallDurationTotal,
      kNCallsIncoming, kNCallsOutgoing, kNCallsMissed,     kDurationIncoming,
      kDurationOutgoing, kNSmsTotal,    kNSmsIn,           kNSmsOut,
      kNInstalls,      kNUninstalls,    kRunningAppsTotal, kNAlarmsSet,
      kNSnoozes,       kNCellEvents,    kNWifiEvents};
  return idx;
}

namespace detail {

struct FeatureAccumulator {
  double counts[kFeatureCount] = {};
  std::set<PeerHash> call_peers, peers_in, peers_out, peers_missed;
  std::set<PeerHash> sms_peers, sms_peers_in, sms_peers_out;
  std::set<std::string> installs, uninstalls, towers, wifi_names;
  double running_apps_events = 0;

  void add(const EventPayload& payload) {
    std::visit(
        [&](const auto& e) {
          using T = std::decay_t<decltype(e)>;
          if constexpr (std::is_same_v<T, SearchEvent>) {
            counts[kNSearches] += 1;
          } else if constexpr (std::is_same_v<T, BookmarkEvent>) {
            counts[kNBookmarks] += 1;
          } else if constexpr (std::is_same_v<T, CallEvent>) {
            counts[kNCallsTotal] += 1;
            counts[kCallDurationTotal] += static_cast<double>(e.duration_s);
            call_peers.insert(e.peer);
            switch (e.direction) {
              case CallDirection::incoming:
                counts[kNCallsIncoming] += 1;
                counts[kDurationIncoming] += static_cast<double>(e.duration_s);
                peers_in.insert(e.peer);
                break;
              case CallDirection::outgoing:
                counts[kNCallsOutgoing] += 1;
                counts[kDurationOutgoing] += static_cast<double>(e.duration_s);
                peers_out.insert(e.peer);
                break;
              case CallDirection::missed:
                counts[kNCallsMissed] += 1;
                peers_missed.insert(e.peer);
                break;
            }
          } else if constexpr (std::is_same_v<T, SmsEvent>) {
            counts[kNSmsTotal] += 1;
            sms_peers.insert(e.peer);
            if (e.direction == SmsDirection::incoming) {
              counts[kNSmsIn] += 1;
              sms_peers_in.insert(e.peer);
            } else {
              counts[kNSmsOut] += 1;
              sms_peers_out.insert(e.peer);
            }
          } else if constexpr (std::is_same_v<T, AppInstallEvent>) {
            counts[kNInstalls] += 1;
            installs.insert(e.app);
          } else if constexpr (std::is_same_v<T, AppUninstallEvent>) {
            counts[kNUninstalls] += 1;
            uninstalls.insert(e.app);
          } else if constexpr (std::is_same_v<T, RunningAppsEvent>) {
            counts[kRunningAppsTotal] += static_cast<double>(e.count);
            running_apps_events += 1;
          } else if constexpr (std::is_same_v<T, AlarmEvent>) {
            if (e.action == AlarmAction::set) counts[kNAlarmsSet] += 1;
            else counts[kNSnoozes] += 1;
          } else if constexpr (std::is_same_v<T, CellTowerEvent>) {
            counts[kNCellEvents] += 1;
            towers.insert(e.tower_id);
          } else if constexpr (std::is_same_v<T, WifiScanEvent>) {
            counts[kNWifiEvents] += 1;
            wifi_names.insert(e.ssid);
          }
        },
        payload);
  }

  FeatureVector finalize() const {
    FeatureVector v{};
    for (int i = 0; i < kFeatureCount; ++i) v[i] = counts[i];
    v[kNCallPeers] = static_cast<double>(call_peers.size());
    v[kNPeersIncoming] = static_cast<double>(peers_in.size());
    v[kNPeersOutgoing] = static_cast<double>(peers_out.size());
    v[kNPeersMissed] = static_cast<double>(peers_missed.size());
    v[kNSmsPeers] = static_cast<double>(sms_peers.size());
    v[kNPeersSmsIn] = static_cast<double>(sms_peers_in.size());
    v[kNPeersSmsOut] = static_cast<double>(sms_peers_out.size());
    v[kSmsInOutRatio] = v[kNSmsIn] / std::max(1.0, v[kNSmsOut]);
    v[kNInstallsDistinct] = static_cast<double>(installs.size());
    v[kNUninstallsDistinct] = static_cast<double>(uninstalls.size());
    v[kRunningAppsMean] =
        running_apps_events > 0 ? v[kRunningAppsTotal] / running_apps_events : 0.0;
    v[kNDistinctCellTowers] = static_cast<double>(towers.size());
    v[kNDistinctWifiNames] = static_cast<double>(wifi_names.size());
    return v;
  }
};

}  // namespace detail

inline FeatureVector extract_features(const EventLog& log, const ParticipantId& p,
                                      const TimeWindow& w) {
  if (!log.has_participant(p)) throw std::invalid_argument("unknown participant '" + p + "'");
  detail::FeatureAccumulator acc;
  for (const auto& rec : log.events) {
    if (rec.actor != p || !w.contains(rec.time)) continue;
    acc.add(rec.payload);
  }
  return acc.finalize();
}

// The five classifier targets.
enum class Attribute { gender, age_over_30, has_children, is_student, us_native };

inline std::string_view attribute_name(Attribute a) {
  switch (a) {
    case Attribute::gender: return "gender";
    case Attribute::age_over_30: return "age_over_30";
    case Attribute::has_children: return "has_children";
    case Attribute::is_student: return "is_student";
    case Attribute::us_native: return "us_native";
  }
  return "?";
}

// Positive class: female / over 30 / has children / student / US native.
inline std::optional<int> attribute_label(const ParticipantProfile& p, Attribute a) {
  auto from_bool = [](const std::optional<bool>& b) -> std::optional<int> {
    if (!b) return std::nullopt;
    return *b ? 1 : 0;
  };
  switch (a) {
    case Attribute::gender:
      if (!p.gender) return std::nullopt;
      return *p.gender == Gender::female ? 1 : 0;
    case Attribute::age_over_30: return from_bool(p.age_over_30);
    case Attribute::has_children: return from_bool(p.has_children);
    case Attribute::is_student: return from_bool(p.is_student);
    case Attribute::us_native: return from_bool(p.us_native);
  }
  return std::nullopt;
}

struct FeatureMatrix {
  std::string attribute;
  std::vector<ParticipantId> ids;     // participant-id order
  std::vector<FeatureVector> rows;
  std::vector<int> labels;            // 0/1, unknowns excluded

  std::size_t size() const { return rows.size(); }
};

struct EmptyMatrixError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline FeatureMatrix build_matrix(const EventLog& log, Attribute attribute, const TimeWindow& w) {
  std::map<ParticipantId, detail::FeatureAccumulator> acc;
  for (const auto& p : log.participants) {
    if (attribute_label(p, attribute)) acc[p.id];  // create a row even with no events
  }
  if (acc.empty())
    throw EmptyMatrixError("attribute '" + std::string(attribute_name(attribute)) +
                           "' unknown for all participants");
  for (const auto& rec : log.events) {
    if (!w.contains(rec.time)) continue;
    auto it = acc.find(rec.actor);
    if (it != acc.end()) it->second.add(rec.payload);
  }
  FeatureMatrix m;
  m.attribute = attribute_name(attribute);
  for (const auto& [id, a] : acc) {
    m.ids.push_back(id);
    m.rows.push_back(a.finalize());
    m.labels.push_back(*attribute_label(*log.find_participant(id), attribute));
  }
  return m;
}

namespace detail {

inline double entropy_bits(const std::map<int, int>& counts, int total) {
  if (total <= 0) return 0.0;
  double h = 0.0;
  for (const auto& [label, n] : counts) {
    if (n == 0) continue;
    double p = static_cast<double>(n) / total;
    h -= p * std::log2(p);
  }
  return h;
}

// Equal-frequency discretization into k = min(10, #distinct) bins. Equal values
// always land in the same bin; bin b closes once its cumulative share reaches
// (b+1)/k of the rows.
inline std::vector<int> equal_frequency_bins(const std::vector<double>& values, int max_bins = 10) {
  const std::size_t n = values.size();
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::size_t distinct = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (i == 0 || values[order[i]] != values[order[i - 1]]) ++distinct;
  const std::size_t k = std::min<std::size_t>(max_bins, std::max<std::size_t>(distinct, 1));
  std::vector<int> bins(n, 0);
  int bin = 0;
  std::size_t filled = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j < n && values[order[j]] == values[order[i]]) ++j;  // one distinct-value group
    for (std::size_t t = i; t < j; ++t) bins[order[t]] = bin;
    filled += j - i;
    if (bin + 1 < static_cast<int>(k) && filled * k >= (static_cast<std::size_t>(bin) + 1) * n)
      ++bin;
    i = j;
  }
  return bins;
}

}  // namespace detail

// gain(f) = H(label) - sum_v (n_v/n) H(label | bin v), in bits.
inline double information_gain(const std::vector<double>& feature, const std::vector<int>& labels,
                               int max_bins = 10) {
  if (feature.size() != labels.size() || feature.size() < 2)
    throw std::invalid_argument("information_gain requires >= 2 aligned rows");
  const int n = static_cast<int>(labels.size());
  std::map<int, int> label_counts;
  for (int y : labels) ++label_counts[y];
  const double h_label = detail::entropy_bits(label_counts, n);
  const std::vector<int> bins = detail::equal_frequency_bins(feature, max_bins);
  std::map<int, std::map<int, int>> per_bin;
  std::map<int, int> bin_sizes;
  for (int i = 0; i < n; ++i) {
    ++per_bin[bins[i]][labels[i]];
    ++bin_sizes[bins[i]];
  }
  double cond = 0.0;
  for (const auto& [b, counts] : per_bin)
    cond += (static_cast<double>(bin_sizes[b]) / n) * detail::entropy_bits(counts, bin_sizes[b]);
  double gain = h_label - cond;
  return gain < 0.0 ? 0.0 : gain;
}

// Descending by gain; ties keep feature-list order.
inline std::vector<std::pair<std::string, double>> information_gain_ranking(
    const FeatureMatrix& m, int max_bins = 10) {
  if (m.size() < 2) throw std::invalid_argument("need >= 2 rows");
  std::vector<std::pair<std::string, double>> ranking;
  std::vector<double> column(m.size());
  for (int f = 0; f < kFeatureCount; ++f) {
    for (std::size_t i = 0; i < m.size(); ++i) column[i] = m.rows[i][f];
    ranking.emplace_back(std::string(feature_names()[f]), information_gain(column, m.labels, max_bins));
  }
  std::stable_sort(ranking.begin(), ranking.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  return ranking;
}

inline void write_feature_matrix_csv(const FeatureMatrix& m, std::ostream& out) {
  out << "id";
  for (auto name : feature_names()) out << ',' << name;
  out << ",label\n";
  out.precision(17);
  for (std::size_t i = 0; i < m.size(); ++i) {
    out << m.ids[i];
    for (double v : m.rows[i]) out << ',' << v;
    out << ',' << m.labels[i] << '\n';
  }
}

}  // namespace curvecast

#endif  // CURVECAST_FEATURES_HPP
