#ifndef CURVECAST_GRAPH_HPP
#define CURVECAST_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "curvecast/events.hpp"
#include "curvecast/rng.hpp"

namespace curvecast {

using NodeId = std::string;

// Undirected weighted graph over participant ids and external peer hashes.
// A node is "in study" when it is a participant of the originating log.
struct WeightedGraph {
  std::map<NodeId, bool> nodes;                                  // id -> in_study
  std::map<std::pair<NodeId, NodeId>, double> edges;             // key ordered lexicographically

  static std::pair<NodeId, NodeId> edge_key(const NodeId& a, const NodeId& b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  }

  void add_node(const NodeId& id, bool in_study) { nodes.emplace(id, in_study); }

  void add_edge(const NodeId& u, const NodeId& v, double w) {
    if (u == v) throw std::invalid_argument("self-loop on '" + u + "'");
    if (!(w > 0)) throw std::invalid_argument("edge weight must be positive");
    edges[edge_key(u, v)] += w;
  }

  double weight(const NodeId& u, const NodeId& v) const {
    auto it = edges.find(edge_key(u, v));
    return it == edges.end() ? 0.0 : it->second;
  }

  bool in_study(const NodeId& id) const {
    auto it = nodes.find(id);
    return it != nodes.end() && it->second;
  }

  bool empty() const { return nodes.empty(); }
};

namespace detail {

// Shared builder core: accumulate pair weights, then enforce the retention
// rule for external peers (kept only when adjacent to at least two distinct
// in-study participants).
class GraphBuilder {
 public:
  explicit GraphBuilder(const EventLog& log) : log_(log) {}

  void contact(const ParticipantId& actor, const NodeId& peer, double w = 1.0) {
    if (actor == peer) return;  // a device reporting itself carries no pair information
    g_.add_node(actor, true);
    g_.add_node(peer, log_.has_participant(peer));
    g_.add_edge(actor, peer, w);
  }

  WeightedGraph finish() {
    std::map<NodeId, std::set<NodeId>> study_neighbors;
    for (const auto& [key, w] : g_.edges) {
      if (g_.in_study(key.second)) study_neighbors[key.first].insert(key.second);
      if (g_.in_study(key.first)) study_neighbors[key.second].insert(key.first);
    }
    WeightedGraph out;
    for (const auto& [id, in_study] : g_.nodes)
      if (in_study || study_neighbors[id].size() >= 2) out.nodes.emplace(id, in_study);
    for (const auto& [key, w] : g_.edges)
      if (out.nodes.count(key.first) && out.nodes.count(key.second)) out.edges.emplace(key, w);
    return out;
  }

 private:
  const EventLog& log_;
  WeightedGraph g_;
};

}  // namespace detail

// Edge weight = number of SMS messages between the pair, both directions.
inline WeightedGraph build_sms_graph(const EventLog& log, const TimeWindow& w) {
  detail::GraphBuilder b(log);
  for (const auto& rec : log.events)
    if (w.contains(rec.time))
      if (const auto* e = std::get_if<SmsEvent>(&rec.payload)) b.contact(rec.actor, e->peer);
  return b.finish();
}

// Edge weight = number of calls between the pair; missed calls count too.
inline WeightedGraph build_call_graph(const EventLog& log, const TimeWindow& w) {
  detail::GraphBuilder b(log);
  for (const auto& rec : log.events)
    if (w.contains(rec.time))
      if (const auto* e = std::get_if<CallEvent>(&rec.payload)) b.contact(rec.actor, e->peer);
  return b.finish();
}

// Edge weight = number of sightings; reports from either side of a pair sum.
inline WeightedGraph build_bluetooth_graph(const EventLog& log, const TimeWindow& w) {
  detail::GraphBuilder b(log);
  for (const auto& rec : log.events)
    if (w.contains(rec.time))
      if (const auto* e = std::get_if<BluetoothEvent>(&rec.payload))
        b.contact(rec.actor, e->peer_device);
  return b.finish();
}

struct NeighborPrediction {
  std::optional<NodeId> node;  // empty: no in-study neighbor
  bool tie = false;
};

// Heaviest in-study neighbor; weight ties resolve to the smallest id.
inline NeighborPrediction predict_significant_other(const WeightedGraph& g, const NodeId& u) {
  NeighborPrediction best;
  double best_w = 0.0;
  for (const auto& [key, w] : g.edges) {
    NodeId other;
    if (key.first == u) other = key.second;
    else if (key.second == u) other = key.first;
    else continue;
    if (!g.in_study(other)) continue;
    if (!best.node || w > best_w) {
      best.node = other;
      best_w = w;
      best.tie = false;
    } else if (w == best_w) {
      best.tie = true;
      if (other < *best.node) best.node = other;
    }
  }
  return best;
}

// Fraction of partnered participants whose heaviest neighbor is their partner.
// Participants without a prediction stay out of the denominator; empty
// denominator yields no value.
inline std::optional<double> couples_accuracy(const WeightedGraph& g,
                                              const std::vector<ParticipantProfile>& profiles) {
  int correct = 0, scored = 0;
  for (const auto& p : profiles) {
    if (!p.partner) continue;
    NeighborPrediction pred = predict_significant_other(g, p.id);
    if (!pred.node) continue;
    ++scored;
    if (*pred.node == *p.partner) ++correct;
  }
  if (scored == 0) return std::nullopt;
  return static_cast<double>(correct) / scored;
}

struct CommunityPartition {
  std::map<NodeId, int> assignment;  // every graph node, exactly once
  double modularity = 0.0;
};

// Q = sum over communities of [ internal/(2m) - (total/(2m))^2 ], with the
// internal sum taken over ordered pairs.
inline double modularity(const WeightedGraph& g, const std::map<NodeId, int>& assignment) {
  double two_m = 0.0;
  std::map<NodeId, double> degree;
  for (const auto& [id, in_study] : g.nodes) degree[id] = 0.0;
  for (const auto& [key, w] : g.edges) {
    degree[key.first] += w;
    degree[key.second] += w;
    two_m += 2.0 * w;
  }
  if (two_m == 0.0) return 0.0;
  std::map<int, double> internal, total;
  for (const auto& [id, k] : degree) total[assignment.at(id)] += k;
  for (const auto& [key, w] : g.edges)
    if (assignment.at(key.first) == assignment.at(key.second))
      internal[assignment.at(key.first)] += 2.0 * w;
  double q = 0.0;
  for (const auto& [c, tot] : total) {
    double in = internal.count(c) ? internal.at(c) : 0.0;
    q += in / two_m - (tot / two_m) * (tot / two_m);
  }
  return q;
}

namespace detail {

struct IndexGraph {
  std::vector<std::map<int, double>> adj;  // off-diagonal, both directions
  std::vector<double> self_loop;           // ordered-pair convention (doubled)
  std::vector<double> degree;              // includes self_loop
  double two_m = 0.0;

  explicit IndexGraph(int n) : adj(n), self_loop(n, 0.0), degree(n, 0.0) {}

  int size() const { return static_cast<int>(adj.size()); }

  void finish_degrees() {
    two_m = 0.0;
    for (int i = 0; i < size(); ++i) {
      degree[i] = self_loop[i];
      for (const auto& [j, w] : adj[i]) degree[i] += w;
      two_m += degree[i];
    }
  }
};

// One sweep-until-stable local-move phase. Returns true if any node moved.
inline bool louvain_local_phase(const IndexGraph& g, std::vector<int>& community, Rng& rng) {
  const int n = g.size();
  const double m = g.two_m / 2.0;
  std::vector<double> sigma_tot(n, 0.0);
  for (int i = 0; i < n; ++i) sigma_tot[community[i]] += g.degree[i];
  bool any_move = false;
  while (true) {
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    rng.shuffle(order);
    int moves = 0;
    for (int i : order) {
      const int c_old = community[i];
      std::map<int, double> w_ic;  // weight from i into each neighboring community
      w_ic[c_old];                 // always consider staying put
      for (const auto& [j, w] : g.adj[i]) w_ic[community[j]] += w;
      sigma_tot[c_old] -= g.degree[i];
      auto gain = [&](int c) {
        return w_ic.count(c) ? w_ic.at(c) / m - sigma_tot[c] * g.degree[i] / (2.0 * m * m)
                             : -sigma_tot[c] * g.degree[i] / (2.0 * m * m);
      };
      const double stay = gain(c_old);
      int best_c = c_old;
      double best_g = stay;
      for (const auto& [c, w] : w_ic) {
        if (c == c_old) continue;
        const double gc = gain(c);
        if (gc > best_g) {
          best_c = c;
          best_g = gc;
        }
      }
      if (best_c != c_old && best_g > stay + 1e-7) {
        community[i] = best_c;
        sigma_tot[best_c] += g.degree[i];
        ++moves;
        any_move = true;
      } else {
        community[i] = c_old;
        sigma_tot[c_old] += g.degree[i];
      }
    }
    if (moves == 0) break;
  }
  return any_move;
}

inline IndexGraph louvain_aggregate(const IndexGraph& g, const std::vector<int>& community,
                                    std::vector<int>& renumber) {
  std::map<int, int> dense;
  for (int c : community)
    dense.emplace(c, 0);
  int next = 0;
  for (auto& [c, idx] : dense) idx = next++;
  renumber.assign(g.size(), 0);
  for (int i = 0; i < g.size(); ++i) renumber[i] = dense.at(community[i]);
  IndexGraph out(next);
  for (int i = 0; i < g.size(); ++i) {
    out.self_loop[renumber[i]] += g.self_loop[i];
    for (const auto& [j, w] : g.adj[i]) {
      if (renumber[i] == renumber[j]) out.self_loop[renumber[i]] += w;  // both directions visit
      else out.adj[renumber[i]][renumber[j]] += w;
    }
  }
  out.finish_degrees();
  return out;
}

}  // namespace detail

namespace detail {

// One full two-phase pass: local moves, aggregate, repeat until stable.
inline std::vector<int> louvain_run(IndexGraph level, Rng rng) {
  const auto n = static_cast<std::size_t>(level.size());
  std::vector<int> to_level(n);
  for (std::size_t i = 0; i < n; ++i) to_level[i] = static_cast<int>(i);
  while (true) {
    std::vector<int> community(level.size());
    for (int i = 0; i < level.size(); ++i) community[i] = i;
    if (!louvain_local_phase(level, community, rng)) break;
    std::vector<int> renumber;
    level = louvain_aggregate(level, community, renumber);
    for (std::size_t v = 0; v < n; ++v) to_level[v] = renumber[community[to_level[v]]];
    if (level.size() == 1) break;
  }
  return to_level;
}

}  // namespace detail

// Two-phase modularity optimization, best of `restarts` seeded runs. Node
// visit order reshuffles per sweep with a stream derived from the seed, so
// results are reproducible. The greedy local phase can settle into a poor
// local optimum on some graphs (paths are a classic case); independent
// restarts make that rare while keeping every run deterministic.
inline CommunityPartition louvain(const WeightedGraph& g, std::uint64_t seed, int restarts = 10) {
  if (g.empty()) throw std::invalid_argument("louvain requires a non-empty graph");
  if (restarts < 1) throw std::invalid_argument("louvain needs at least one restart");
  std::vector<NodeId> ids;
  for (const auto& [id, in_study] : g.nodes) ids.push_back(id);
  std::map<NodeId, int> index;
  for (int i = 0; i < static_cast<int>(ids.size()); ++i) index[ids[i]] = i;

  detail::IndexGraph ig(static_cast<int>(ids.size()));
  for (const auto& [key, w] : g.edges) {
    ig.adj[index[key.first]][index[key.second]] += w;
    ig.adj[index[key.second]][index[key.first]] += w;
  }
  ig.finish_degrees();

  std::vector<int> identity(ids.size());
  for (std::size_t i = 0; i < ids.size(); ++i) identity[i] = static_cast<int>(i);

  auto densify = [&](const std::vector<int>& node_comm) {
    CommunityPartition part;
    std::map<int, int> dense;
    int next = 0;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto [it, inserted] = dense.emplace(node_comm[i], next);
      if (inserted) ++next;
      part.assignment[ids[i]] = it->second;
    }
    part.modularity = modularity(g, part.assignment);
    return part;
  };

  if (ig.two_m <= 0.0) return densify(identity);

  CommunityPartition best;
  for (int r = 0; r < restarts; ++r) {
    auto part = densify(
        detail::louvain_run(ig, Rng(mix_seed(seed, "louvain", static_cast<std::uint64_t>(r)))));
    if (r == 0 || part.modularity > best.modularity) best = std::move(part);
  }
  return best;
}

// Majority known label per community; ties and label-free communities predict
// nothing for their members.
inline std::map<NodeId, std::string> predict_ethnicity(
    const CommunityPartition& p, const std::map<NodeId, std::string>& known) {
  std::map<int, std::map<std::string, int>> votes;
  for (const auto& [id, label] : known) {
    auto it = p.assignment.find(id);
    if (it != p.assignment.end()) ++votes[it->second][label];
  }
  std::map<int, std::string> winner;
  for (const auto& [c, counts] : votes) {
    int best = 0, runner_up = 0;
    std::string label;
    for (const auto& [l, k] : counts) {
      if (k > best) {
        runner_up = best;
        best = k;
        label = l;
      } else if (k > runner_up) {
        runner_up = k;
      }
    }
    if (best > runner_up) winner[c] = label;
  }
  std::map<NodeId, std::string> out;
  for (const auto& [id, c] : p.assignment) {
    auto it = winner.find(c);
    if (it != winner.end()) out[id] = it->second;
  }
  return out;
}

// Fraction of participants with known true ethnicity whose prediction matches;
// missing predictions count as misses.
inline double ethnicity_accuracy(const std::map<NodeId, std::string>& predictions,
                                 const std::vector<ParticipantProfile>& profiles) {
  int correct = 0, total = 0;
  for (const auto& p : profiles) {
    if (!p.ethnicity) continue;
    ++total;
    auto it = predictions.find(p.id);
    if (it != predictions.end() && it->second == *p.ethnicity) ++correct;
  }
  if (total == 0) throw std::invalid_argument("no participant has a known ethnicity");
  return static_cast<double>(correct) / total;
}

// Same, restricted to an evaluation subset (the held-out ids of a
// leave-k-out protocol).
inline double ethnicity_accuracy(const std::map<NodeId, std::string>& predictions,
                                 const std::vector<ParticipantProfile>& profiles,
                                 const std::set<NodeId>& subset) {
  std::vector<ParticipantProfile> restricted;
  for (const auto& p : profiles)
    if (subset.count(p.id)) restricted.push_back(p);
  return ethnicity_accuracy(predictions, restricted);
}

inline void write_graph_csv(const WeightedGraph& g, std::ostream& out) {
  out << "u,v,w,in_study_u,in_study_v\n";
  out.precision(17);
  for (const auto& [key, w] : g.edges)
    out << key.first << ',' << key.second << ',' << w << ','
        << (g.in_study(key.first) ? "true" : "false") << ','
        << (g.in_study(key.second) ? "true" : "false") << '\n';
}

inline void write_partition_csv(const CommunityPartition& p, std::ostream& out) {
  out << "node,community\n";
  for (const auto& [id, c] : p.assignment) out << id << ',' << c << '\n';
}

}  // namespace curvecast

#endif  // CURVECAST_GRAPH_HPP
