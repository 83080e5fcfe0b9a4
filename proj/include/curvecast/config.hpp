#ifndef CURVECAST_CONFIG_HPP
#define CURVECAST_CONFIG_HPP

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "curvecast/synth.hpp"

namespace curvecast {

// Plain key-value config files:
//
//   # comment
//   n_couples = 70
//   rate.bluetooth = 25
//   effect.female.search = 0.6
//   prior.student = 0.35
//   ethnicity_weights = asian:0.4, white:0.4, mideast:0.2
//
// Unset keys keep their defaults; an ethnicity_weights line replaces the whole
// table. Unknown keys are errors so typos cannot silently fall back.

namespace detail {

inline std::string trim(std::string_view s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_double(const std::string& value, int line) {
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": not a number: '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("line " + std::to_string(line) + ": trailing junk in '" + value + "'");
  return v;
}

inline long long parse_int(const std::string& value, int line) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(value, &used);
  } catch (const std::exception&) {
    throw ConfigError("line " + std::to_string(line) + ": not an integer: '" + value + "'");
  }
  if (used != value.size())
    throw ConfigError("line " + std::to_string(line) + ": trailing junk in '" + value + "'");
  return v;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = s.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::map<std::string, double> parse_weights(const std::string& value, int line) {
  std::map<std::string, double> weights;
  for (const auto& part : split(value, ',')) {
    auto pair = split(trim(part), ':');
    if (pair.size() != 2)
      throw ConfigError("line " + std::to_string(line) + ": expected label:weight, got '" +
                        part + "'");
    const std::string label = trim(pair[0]);
    if (label.empty() || weights.count(label))
      throw ConfigError("line " + std::to_string(line) + ": bad or repeated label '" + label + "'");
    weights[label] = parse_double(trim(pair[1]), line);
  }
  return weights;
}

inline void apply_key(CommunityConfig& cfg, const std::string& key, const std::string& value,
                      int line) {
  auto bad_key = [&] {
    throw ConfigError("line " + std::to_string(line) + ": unknown key '" + key + "'");
  };
  if (key == "n_couples") {
    cfg.n_couples = static_cast<int>(parse_int(value, line));
  } else if (key == "days") {
    cfg.days = static_cast<int>(parse_int(value, line));
  } else if (key == "seed") {
    cfg.seed = static_cast<std::uint64_t>(parse_int(value, line));
  } else if (key == "partner_proximity_boost") {
    cfg.partner_proximity_boost = parse_double(value, line);
  } else if (key == "ethnic_sms_homophily") {
    cfg.ethnic_sms_homophily = parse_double(value, line);
  } else if (key == "couple_same_ethnicity_prob") {
    cfg.couple_same_ethnicity_prob = parse_double(value, line);
  } else if (key == "attribute_known_prob") {
    cfg.attribute_known_prob = parse_double(value, line);
  } else if (key == "out_of_study_peer_prob") {
    cfg.out_of_study_peer_prob = parse_double(value, line);
  } else if (key == "ethnicity_weights") {
    cfg.ethnicity_weights = parse_weights(value, line);
  } else if (key.rfind("rate.", 0) == 0) {
    EventChannel ch;
    try {
      ch = channel_from_name(key.substr(5));
    } catch (const ConfigError&) {
      bad_key();
      return;
    }
    cfg.rate_table[static_cast<int>(ch)] = parse_double(value, line);
  } else if (key.rfind("prior.", 0) == 0) {
    const std::string attr = key.substr(6);
    if (!cfg.attribute_priors.count(attr)) bad_key();
    cfg.attribute_priors[attr] = parse_double(value, line);
  } else if (key.rfind("effect.", 0) == 0) {
    auto parts = split(key, '.');
    if (parts.size() != 3) bad_key();
    bool known_pred = false;
    for (const auto& p : effect_predicates()) known_pred = known_pred || p == parts[1];
    if (!known_pred) bad_key();
    EventChannel ch;
    try {
      ch = channel_from_name(parts[2]);
    } catch (const ConfigError&) {
      bad_key();
      return;
    }
    cfg.effect_table[{parts[1], ch}] = parse_double(value, line);
  } else {
    bad_key();
  }
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  std::string s = buf;
  // prefer the shortest representation that round-trips
  for (int prec = 1; prec < 17; ++prec) {
    char probe[40];
    std::snprintf(probe, sizeof(probe), "%.*g", prec, v);
    if (std::stod(probe) == v) return probe;
  }
  return s;
}

}  // namespace detail

inline CommunityConfig parse_config_text(std::string_view text) {
  CommunityConfig cfg;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    std::string_view raw = text.substr(pos, nl == std::string_view::npos ? nl : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    std::string line = detail::trim(raw);
    if (line.empty() || line[0] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string key = detail::trim(line.substr(0, eq));
    const std::string value = detail::trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    detail::apply_key(cfg, key, value, line_no);
  }
  validate_config(cfg);
  return cfg;
}

inline CommunityConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

// Full schema with the effective values, suitable for reading back.
inline std::string render_config(const CommunityConfig& cfg) {
  std::ostringstream os;
  os << "n_couples = " << cfg.n_couples << "\n";
  os << "days = " << cfg.days << "\n";
  os << "seed = " << cfg.seed << "\n";
  os << "partner_proximity_boost = " << detail::format_double(cfg.partner_proximity_boost) << "\n";
  os << "ethnic_sms_homophily = " << detail::format_double(cfg.ethnic_sms_homophily) << "\n";
  os << "couple_same_ethnicity_prob = " << detail::format_double(cfg.couple_same_ethnicity_prob)
     << "\n";
  os << "attribute_known_prob = " << detail::format_double(cfg.attribute_known_prob) << "\n";
  os << "out_of_study_peer_prob = " << detail::format_double(cfg.out_of_study_peer_prob) << "\n";
  os << "ethnicity_weights = ";
  bool first = true;
  for (const auto& [label, w] : cfg.ethnicity_weights) {
    if (!first) os << ", ";
    os << label << ":" << detail::format_double(w);
    first = false;
  }
  os << "\n";
  for (const auto& [attr, p] : cfg.attribute_priors)
    os << "prior." << attr << " = " << detail::format_double(p) << "\n";
  for (int ch = 0; ch < kChannelCount; ++ch)
    os << "rate." << channel_name(static_cast<EventChannel>(ch)) << " = "
       << detail::format_double(cfg.rate_table[ch]) << "\n";
  for (const auto& [key, factor] : cfg.effect_table)
    os << "effect." << key.first << "." << channel_name(key.second) << " = "
       << detail::format_double(factor) << "\n";
  return os.str();
}

}  // namespace curvecast

#endif  // CURVECAST_CONFIG_HPP
