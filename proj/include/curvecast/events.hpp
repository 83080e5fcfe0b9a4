#ifndef CURVECAST_EVENTS_HPP
#define CURVECAST_EVENTS_HPP

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace curvecast {

using ParticipantId = std::string;
using PeerHash = std::string;

struct Timestamp {
  std::int64_t seconds = 0;  // UTC seconds since epoch, non-negative
  friend auto operator<=>(const Timestamp&, const Timestamp&) = default;
};

// Half-open [start, end): an event on a boundary belongs to exactly one window.
struct TimeWindow {
  Timestamp start;
  Timestamp end;

  TimeWindow(Timestamp s, Timestamp e) : start(s), end(e) {
    if (!(start < end)) throw std::invalid_argument("TimeWindow requires start < end");
  }

  bool contains(Timestamp t) const { return start <= t && t < end; }
};

enum class CallDirection { incoming, outgoing, missed };
enum class SmsDirection { incoming, outgoing };
enum class AlarmAction { set, snooze };
enum class Gender { female, male };

struct CallEvent {
  CallDirection direction;
  std::int64_t duration_s = 0;  // 0 for missed calls
  PeerHash peer;
  friend bool operator==(const CallEvent&, const CallEvent&) = default;
};
struct SmsEvent {
  SmsDirection direction;
  PeerHash peer;
  friend bool operator==(const SmsEvent&, const SmsEvent&) = default;
};
struct BluetoothEvent {
  PeerHash peer_device;
  friend bool operator==(const BluetoothEvent&, const BluetoothEvent&) = default;
};
struct WifiScanEvent {
  PeerHash ssid;
  friend bool operator==(const WifiScanEvent&, const WifiScanEvent&) = default;
};
struct CellTowerEvent {
  PeerHash tower_id;
  friend bool operator==(const CellTowerEvent&, const CellTowerEvent&) = default;
};
struct AppInstallEvent {
  std::string app;
  friend bool operator==(const AppInstallEvent&, const AppInstallEvent&) = default;
};
struct AppUninstallEvent {
  std::string app;
  friend bool operator==(const AppUninstallEvent&, const AppUninstallEvent&) = default;
};
struct RunningAppsEvent {
  std::int64_t count = 0;
  friend bool operator==(const RunningAppsEvent&, const RunningAppsEvent&) = default;
};
struct AlarmEvent {
  AlarmAction action;
  friend bool operator==(const AlarmEvent&, const AlarmEvent&) = default;
};
struct SearchEvent {
  friend bool operator==(const SearchEvent&, const SearchEvent&) = default;
};
struct BookmarkEvent {
  friend bool operator==(const BookmarkEvent&, const BookmarkEvent&) = default;
};

using EventPayload = std::variant<CallEvent, SmsEvent, BluetoothEvent, WifiScanEvent,
                                  CellTowerEvent, AppInstallEvent, AppUninstallEvent,
                                  RunningAppsEvent, AlarmEvent, SearchEvent, BookmarkEvent>;

struct EventRecord {
  Timestamp time;
  ParticipantId actor;
  EventPayload payload;
  friend bool operator==(const EventRecord&, const EventRecord&) = default;
};

// Ground-truth attributes; any of them may be unknown for a given participant.
struct ParticipantProfile {
  ParticipantId id;
  std::optional<Gender> gender;
  std::optional<bool> age_over_30;
  std::optional<bool> has_children;
  std::optional<bool> is_student;
  std::optional<bool> us_native;
  std::optional<std::string> ethnicity;
  std::optional<ParticipantId> partner;
  friend bool operator==(const ParticipantProfile&, const ParticipantProfile&) = default;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& file, int line, const std::string& what)
      : std::runtime_error(file + ":" + std::to_string(line) + ": " + what), line_number(line) {}
  int line_number;
};

struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct EventLog {
  std::vector<EventRecord> events;               // sorted by time
  std::vector<ParticipantProfile> participants;  // sorted by id

  bool has_participant(const ParticipantId& id) const {
    return find_participant(id) != nullptr;
  }

  const ParticipantProfile* find_participant(const ParticipantId& id) const {
    auto it = std::lower_bound(participants.begin(), participants.end(), id,
                               [](const ParticipantProfile& p, const ParticipantId& key) {
                                 return p.id < key;
                               });
    if (it == participants.end() || it->id != id) return nullptr;
    return &*it;
  }

  friend bool operator==(const EventLog&, const EventLog&) = default;
};

namespace detail {

inline std::vector<std::string> split_csv(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

inline std::int64_t parse_int(std::string_view s, const std::string& file, int line,
                              const std::string& what) {
  std::int64_t value = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size())
    throw ParseError(file, line, "invalid " + what + " '" + std::string(s) + "'");
  return value;
}

inline std::optional<bool> parse_opt_bool(std::string_view s, const std::string& file, int line,
                                          const std::string& what) {
  if (s.empty()) return std::nullopt;
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ParseError(file, line, "invalid " + what + " '" + std::string(s) + "'");
}

inline const char* to_string(CallDirection d) {
  switch (d) {
    case CallDirection::incoming: return "incoming";
    case CallDirection::outgoing: return "outgoing";
    case CallDirection::missed: return "missed";
  }
  return "?";
}

inline const char* to_string(SmsDirection d) {
  return d == SmsDirection::incoming ? "incoming" : "outgoing";
}

inline const char* to_string(AlarmAction a) { return a == AlarmAction::set ? "set" : "snooze"; }

inline void require_no_comma(const std::string& field, const std::string& what) {
  if (field.find(',') != std::string::npos)
    throw std::invalid_argument(what + " must not contain commas: '" + field + "'");
}

}  // namespace detail

// One record per line: `timestamp,actor,kind,field...`. Lines starting with '#'
// and blank lines are skipped.
inline void parse_event_line(std::string_view line, const std::string& file, int line_no,
                             std::vector<EventRecord>& out) {
  auto fields = detail::split_csv(line);
  if (fields.size() < 3) throw ParseError(file, line_no, "expected timestamp,actor,kind");
  EventRecord rec;
  rec.time.seconds = detail::parse_int(fields[0], file, line_no, "timestamp");
  if (rec.time.seconds < 0) throw ParseError(file, line_no, "negative timestamp");
  rec.actor = fields[1];
  if (rec.actor.empty()) throw ParseError(file, line_no, "empty actor id");
  const std::string& kind = fields[2];
  auto expect = [&](std::size_t n) {
    if (fields.size() != 3 + n)
      throw ParseError(file, line_no,
                       "kind '" + kind + "' takes " + std::to_string(n) + " field(s), got " +
                           std::to_string(fields.size() - 3));
  };
  if (kind == "call") {
    expect(3);
    CallEvent e;
    if (fields[3] == "incoming") e.direction = CallDirection::incoming;
    else if (fields[3] == "outgoing") e.direction = CallDirection::outgoing;
    else if (fields[3] == "missed") e.direction = CallDirection::missed;
    else throw ParseError(file, line_no, "invalid call direction '" + fields[3] + "'");
    e.duration_s = detail::parse_int(fields[4], file, line_no, "call duration");
    if (e.duration_s < 0) throw ParseError(file, line_no, "negative call duration");
    if (e.direction == CallDirection::missed && e.duration_s != 0)
      throw ParseError(file, line_no, "missed call must have duration 0");
    e.peer = fields[5];
    rec.payload = e;
  } else if (kind == "sms") {
    expect(2);
    SmsEvent e;
    if (fields[3] == "incoming") e.direction = SmsDirection::incoming;
    else if (fields[3] == "outgoing") e.direction = SmsDirection::outgoing;
    else throw ParseError(file, line_no, "invalid sms direction '" + fields[3] + "'");
    e.peer = fields[4];
    rec.payload = e;
  } else if (kind == "bluetooth") {
    expect(1);
    rec.payload = BluetoothEvent{fields[3]};
  } else if (kind == "wifi_scan") {
    expect(1);
    rec.payload = WifiScanEvent{fields[3]};
  } else if (kind == "cell_tower") {
    expect(1);
    rec.payload = CellTowerEvent{fields[3]};
  } else if (kind == "app_install") {
    expect(1);
    rec.payload = AppInstallEvent{fields[3]};
  } else if (kind == "app_uninstall") {
    expect(1);
    rec.payload = AppUninstallEvent{fields[3]};
  } else if (kind == "running_apps") {
    expect(1);
    std::int64_t n = detail::parse_int(fields[3], file, line_no, "running apps count");
    if (n < 0) throw ParseError(file, line_no, "negative running apps count");
    rec.payload = RunningAppsEvent{n};
  } else if (kind == "alarm") {
    expect(1);
    if (fields[3] == "set") rec.payload = AlarmEvent{AlarmAction::set};
    else if (fields[3] == "snooze") rec.payload = AlarmEvent{AlarmAction::snooze};
    else throw ParseError(file, line_no, "invalid alarm action '" + fields[3] + "'");
  } else if (kind == "search") {
    expect(0);
    rec.payload = SearchEvent{};
  } else if (kind == "bookmark") {
    expect(0);
    rec.payload = BookmarkEvent{};
  } else {
    throw ParseError(file, line_no, "unknown event kind '" + kind + "'");
  }
  out.push_back(std::move(rec));
}

inline std::vector<ParticipantProfile> parse_profiles_text(std::istream& in,
                                                           const std::string& file) {
  static const std::string kHeader =
      "id,gender,age_over_30,has_children,is_student,us_native,ethnicity,partner";
  std::vector<ParticipantProfile> profiles;
  std::string line;
  int line_no = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kHeader) throw ParseError(file, line_no, "expected header '" + kHeader + "'");
      saw_header = true;
      continue;
    }
    auto f = detail::split_csv(line);
    if (f.size() != 8) throw ParseError(file, line_no, "expected 8 columns");
    ParticipantProfile p;
    p.id = f[0];
    if (p.id.empty()) throw ParseError(file, line_no, "empty participant id");
    if (!f[1].empty()) {
      if (f[1] == "female") p.gender = Gender::female;
      else if (f[1] == "male") p.gender = Gender::male;
      else throw ParseError(file, line_no, "invalid gender '" + f[1] + "'");
    }
    p.age_over_30 = detail::parse_opt_bool(f[2], file, line_no, "age_over_30");
    p.has_children = detail::parse_opt_bool(f[3], file, line_no, "has_children");
    p.is_student = detail::parse_opt_bool(f[4], file, line_no, "is_student");
    p.us_native = detail::parse_opt_bool(f[5], file, line_no, "us_native");
    if (!f[6].empty()) p.ethnicity = f[6];
    if (!f[7].empty()) p.partner = f[7];
    profiles.push_back(std::move(p));
  }
  if (!saw_header) throw ParseError(file, std::max(line_no, 1), "missing profiles header");
  return profiles;
}

// Checks the partner involution and duplicate ids; throws ValidationError.
inline void validate_profiles(const std::vector<ParticipantProfile>& profiles) {
  std::map<ParticipantId, const ParticipantProfile*> by_id;
  for (const auto& p : profiles) {
    if (!by_id.emplace(p.id, &p).second)
      throw ValidationError("duplicate participant id '" + p.id + "'");
  }
  for (const auto& p : profiles) {
    if (!p.partner) continue;
    if (*p.partner == p.id) throw ValidationError("participant '" + p.id + "' is its own partner");
    auto it = by_id.find(*p.partner);
    if (it == by_id.end())
      throw ValidationError("partner '" + *p.partner + "' of '" + p.id + "' not in profiles");
    const auto& q = *it->second;
    if (!q.partner || *q.partner != p.id)
      throw ValidationError("partner relation not symmetric for '" + p.id + "'");
  }
}

inline EventLog parse_event_log(const std::filesystem::path& events_path,
                                const std::filesystem::path& profiles_path) {
  EventLog log;
  {
    std::ifstream in(profiles_path);
    if (!in) throw std::runtime_error("cannot open " + profiles_path.string());
    log.participants = parse_profiles_text(in, profiles_path.filename().string());
  }
  validate_profiles(log.participants);
  std::sort(log.participants.begin(), log.participants.end(),
            [](const ParticipantProfile& a, const ParticipantProfile& b) { return a.id < b.id; });

  std::ifstream in(events_path);
  if (!in) throw std::runtime_error("cannot open " + events_path.string());
  const std::string file = events_path.filename().string();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    parse_event_line(line, file, line_no, log.events);
    if (!log.has_participant(log.events.back().actor))
      throw ParseError(file, line_no,
                       "actor '" + log.events.back().actor + "' not in profiles file");
  }
  std::stable_sort(log.events.begin(), log.events.end(),
                   [](const EventRecord& a, const EventRecord& b) { return a.time < b.time; });
  return log;
}

inline std::string serialize_event(const EventRecord& rec) {
  std::ostringstream os;
  os << rec.time.seconds << ',' << rec.actor << ',';
  std::visit(
      [&](const auto& e) {
        using T = std::decay_t<decltype(e)>;
        if constexpr (std::is_same_v<T, CallEvent>) {
          detail::require_no_comma(e.peer, "call peer");
          os << "call," << detail::to_string(e.direction) << ',' << e.duration_s << ',' << e.peer;
        } else if constexpr (std::is_same_v<T, SmsEvent>) {
          detail::require_no_comma(e.peer, "sms peer");
          os << "sms," << detail::to_string(e.direction) << ',' << e.peer;
        } else if constexpr (std::is_same_v<T, BluetoothEvent>) {
          detail::require_no_comma(e.peer_device, "bluetooth peer");
          os << "bluetooth," << e.peer_device;
        } else if constexpr (std::is_same_v<T, WifiScanEvent>) {
          detail::require_no_comma(e.ssid, "wifi ssid");
          os << "wifi_scan," << e.ssid;
        } else if constexpr (std::is_same_v<T, CellTowerEvent>) {
          detail::require_no_comma(e.tower_id, "cell tower id");
          os << "cell_tower," << e.tower_id;
        } else if constexpr (std::is_same_v<T, AppInstallEvent>) {
          detail::require_no_comma(e.app, "app name");
          os << "app_install," << e.app;
        } else if constexpr (std::is_same_v<T, AppUninstallEvent>) {
          detail::require_no_comma(e.app, "app name");
          os << "app_uninstall," << e.app;
        } else if constexpr (std::is_same_v<T, RunningAppsEvent>) {
          os << "running_apps," << e.count;
        } else if constexpr (std::is_same_v<T, AlarmEvent>) {
          os << "alarm," << detail::to_string(e.action);
        } else if constexpr (std::is_same_v<T, SearchEvent>) {
          os << "search";
        } else {
          os << "bookmark";
        }
      },
      rec.payload);
  return os.str();
}

inline std::string serialize_profile(const ParticipantProfile& p) {
  auto opt_bool = [](const std::optional<bool>& b) {
    return b ? (*b ? std::string("true") : std::string("false")) : std::string();
  };
  std::ostringstream os;
  os << p.id << ',';
  os << (p.gender ? (*p.gender == Gender::female ? "female" : "male") : "") << ',';
  os << opt_bool(p.age_over_30) << ',' << opt_bool(p.has_children) << ','
     << opt_bool(p.is_student) << ',' << opt_bool(p.us_native) << ',';
  os << (p.ethnicity ? *p.ethnicity : "") << ',';
  os << (p.partner ? *p.partner : "");
  return os.str();
}

inline void write_event_log(const EventLog& log, const std::filesystem::path& events_path,
                            const std::filesystem::path& profiles_path) {
  {
    std::ofstream out(events_path);
    if (!out) throw std::runtime_error("cannot write " + events_path.string());
    out << "# timestamp,actor,kind,fields...\n";
    for (const auto& rec : log.events) out << serialize_event(rec) << '\n';
  }
  std::ofstream out(profiles_path);
  if (!out) throw std::runtime_error("cannot write " + profiles_path.string());
  out << "id,gender,age_over_30,has_children,is_student,us_native,ethnicity,partner\n";
  for (const auto& p : log.participants) out << serialize_profile(p) << '\n';
}

inline EventLog slice_window(const EventLog& log, const TimeWindow& w) {
  EventLog out;
  out.participants = log.participants;
  auto lo = std::lower_bound(log.events.begin(), log.events.end(), w.start,
                             [](const EventRecord& e, Timestamp t) { return e.time < t; });
  auto hi = std::lower_bound(lo, log.events.end(), w.end,
                             [](const EventRecord& e, Timestamp t) { return e.time < t; });
  out.events.assign(lo, hi);
  return out;
}

}  // namespace curvecast

#endif  // CURVECAST_EVENTS_HPP
