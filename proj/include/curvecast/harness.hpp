#ifndef CURVECAST_HARNESS_HPP
#define CURVECAST_HARNESS_HPP

#include <map>
#include <set>
#include <string>
#include <vector>

#include "curvecast/classify.hpp"
#include "curvecast/features.hpp"
#include "curvecast/gompertz.hpp"
#include "curvecast/graph.hpp"

namespace curvecast {

enum class TaskMethod { ml, graph };

struct TaskSpec {
  std::string name;
  TaskMethod method = TaskMethod::ml;
  ModelKind model = ModelKind::naive_bayes;  // ml tasks
  Attribute attribute = Attribute::gender;   // ml tasks
  Metric metric = Metric::auc;
  TimeUnit unit = TimeUnit::days;
};

// The seven standard tasks. ML tasks score AUC on daily prefixes; the two
// graph tasks score accuracy, with ethnicity stepping weekly because its
// community structure needs more data per point.
inline std::vector<TaskSpec> default_tasks() {
  std::vector<TaskSpec> tasks;
  tasks.push_back({"gender", TaskMethod::ml, ModelKind::decision_tree, Attribute::gender,
                   Metric::auc, TimeUnit::days});
  tasks.push_back({"origin", TaskMethod::ml, ModelKind::naive_bayes, Attribute::us_native,
                   Metric::auc, TimeUnit::days});
  tasks.push_back({"children", TaskMethod::ml, ModelKind::naive_bayes, Attribute::has_children,
                   Metric::auc, TimeUnit::days});
  tasks.push_back({"student", TaskMethod::ml, ModelKind::bagged_trees, Attribute::is_student,
                   Metric::auc, TimeUnit::days});
  tasks.push_back({"age", TaskMethod::ml, ModelKind::decision_tree, Attribute::age_over_30,
                   Metric::auc, TimeUnit::days});
  tasks.push_back({"significant_other", TaskMethod::graph, ModelKind::naive_bayes,
                   Attribute::gender, Metric::accuracy, TimeUnit::days});
  tasks.push_back({"ethnicity", TaskMethod::graph, ModelKind::naive_bayes, Attribute::gender,
                   Metric::accuracy, TimeUnit::weeks});
  return tasks;
}

struct RunConfig {
  int days = 30;
  std::uint64_t seed = 42;
  std::vector<TaskSpec> tasks = default_tasks();
  int prefix_k = 15;
  double horizon_days = 90.0;
  std::vector<double> targets = {0.75, 0.9};
  double hidden_label_fraction = 0.3;
};

namespace detail {

// The ethnicity task holds out one fixed set of labels for the whole run, so
// weekly points measure growing evidence about the same unknowns.
inline std::set<ParticipantId> hidden_label_set(const EventLog& log, const RunConfig& cfg) {
  std::vector<ParticipantId> labeled;
  for (const auto& p : log.participants)
    if (p.ethnicity) labeled.push_back(p.id);
  Rng rng(mix_seed(cfg.seed, "ethnicity/hidden"));
  rng.shuffle(labeled);
  const auto k = static_cast<std::size_t>(cfg.hidden_label_fraction * labeled.size() + 0.5);
  return {labeled.begin(), labeled.begin() + std::min(k, labeled.size())};
}

inline double evaluate_ml_point(const EventLog& log, const TaskSpec& task, TimeWindow w,
                                std::uint64_t point_seed) {
  auto m = build_matrix(log, task.attribute, w);
  return cross_validate(task.model, m, point_seed).auc;
}

inline double evaluate_couples_point(const EventLog& log, TimeWindow w) {
  auto g = build_bluetooth_graph(log, w);
  auto acc = couples_accuracy(g, log.participants);
  if (!acc) throw EmptyMatrixError("no couple predictions in window");
  return *acc;
}

inline double evaluate_ethnicity_point(const EventLog& log, TimeWindow w,
                                       const std::set<ParticipantId>& hidden,
                                       std::uint64_t point_seed) {
  auto g = build_sms_graph(log, w);
  std::map<NodeId, std::string> known;
  for (const auto& p : log.participants)
    if (p.ethnicity && !hidden.count(p.id)) known[p.id] = *p.ethnicity;
  auto partition = louvain(g, point_seed);
  auto predictions = predict_ethnicity(partition, known);
  return ethnicity_accuracy(predictions, log.participants, hidden);
}

}  // namespace detail

// One curve per task: at point t the window covers the first t days (or
// weeks), everything is rebuilt from that slice, and the task metric is
// recorded. Points whose evaluation is undefined (say, a single-class matrix
// on day 1) are skipped; the curve keeps going.
inline std::vector<LearningCurve> run_incremental(const EventLog& log, const RunConfig& cfg) {
  if (cfg.days < 1) throw std::invalid_argument("run needs at least one day");
  const auto hidden = detail::hidden_label_set(log, cfg);

  std::vector<LearningCurve> curves;
  for (const auto& task : cfg.tasks) {
    LearningCurve curve;
    curve.task = task.name;
    curve.metric = task.metric;
    curve.unit = task.unit;
    const int points = task.unit == TimeUnit::weeks ? cfg.days / 7 : cfg.days;
    const std::int64_t step = task.unit == TimeUnit::weeks ? 7 * 86400 : 86400;
    for (int t = 1; t <= points; ++t) {
      const TimeWindow w{{0}, {t * step}};
      const std::uint64_t point_seed = mix_seed(cfg.seed, task.name, static_cast<std::uint64_t>(t));
      try {
        double value = 0;
        if (task.method == TaskMethod::ml) {
          value = detail::evaluate_ml_point(log, task, w, point_seed);
        } else if (task.name == "significant_other") {
          value = detail::evaluate_couples_point(log, w);
        } else {
          value = detail::evaluate_ethnicity_point(log, w, hidden, point_seed);
        }
        curve.times.push_back(t);
        curve.values.push_back(value);
      } catch (const EmptyMatrixError&) {
      } catch (const UndefinedAucError&) {
      } catch (const std::invalid_argument&) {
        // an empty or degenerate window; later points may still succeed
      }
    }
    curves.push_back(std::move(curve));
  }
  return curves;
}

}  // namespace curvecast

#endif  // CURVECAST_HARNESS_HPP
