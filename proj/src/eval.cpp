#include "laburst/eval.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "json.hpp"

#include "laburst/rng.hpp"
#include "laburst/textio.hpp"
#include "laburst/training.hpp"

namespace laburst {

std::vector<GroundTruth> load_truth_csv(const std::string& path,
                                        std::int64_t t0, std::int64_t delta) {
  std::vector<GroundTruth> events;
  auto find_event = [&](const std::string& name) -> GroundTruth& {
    for (auto& e : events) {
      if (e.name == name) return e;
    }
    events.push_back({name, {}});
    return events.back();
  };

  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) continue;
    const auto fields = csv_split(lines[i]);
    if (fields.size() < 2) continue;
    if (i == 0 && (fields[0] == "event" || fields[0] == "event_name")) {
      continue;  // header
    }
    std::int64_t slice;
    if (auto v = parse_int(fields[1])) {
      slice = *v;
    } else if (auto ts = parse_iso8601(fields[1])) {
      slice = (*ts - t0) / delta;
    } else {
      throw std::runtime_error("truth csv: bad time field '" + fields[1] +
                               "' in " + path);
    }
    find_event(fields[0]).moments.insert(slice);
  }
  return events;
}

std::set<std::int64_t> expand_truth(const std::set<std::int64_t>& moments,
                                    int tau, std::int64_t span_begin,
                                    std::int64_t span_end) {
  std::set<std::int64_t> expanded;
  for (const std::int64_t t : moments) {
    for (int d = 0; d <= tau; ++d) {
      const std::int64_t u = t + d;
      if (u >= span_begin && u <= span_end) expanded.insert(u);
    }
  }
  return expanded;
}

ConfusionCounts confusion(std::span<const ScorePoint> series,
                          const std::set<std::int64_t>& expanded,
                          double threshold) {
  ConfusionCounts c;
  for (const auto& p : series) {
    const bool predicted = p.score >= threshold;
    const bool actual = expanded.count(p.t) > 0;
    if (predicted && actual) ++c.tp;
    else if (predicted && !actual) ++c.fp;
    else if (!predicted && actual) ++c.fn;
    else ++c.tn;
  }
  return c;
}

RocCurve roc(std::span<const ScorePoint> series,
             const std::set<std::int64_t>& expanded) {
  std::uint64_t n_pos = 0, n_neg = 0;
  // score -> (positives, negatives) at that score, descending.
  std::map<double, std::pair<std::uint64_t, std::uint64_t>,
           std::greater<double>>
      groups;
  for (const auto& p : series) {
    const bool actual = expanded.count(p.t) > 0;
    auto& g = groups[p.score];
    if (actual) {
      ++g.first;
      ++n_pos;
    } else {
      ++g.second;
      ++n_neg;
    }
  }
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument(
        "roc: ground truth must contain both classes");
  }

  RocCurve curve;
  curve.points.push_back(
      {std::numeric_limits<double>::infinity(), 0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  double auc = 0.0;
  double prev_fpr = 0.0, prev_tpr = 0.0;
  for (const auto& [score, counts] : groups) {
    tp += counts.first;
    fp += counts.second;
    const double tpr = static_cast<double>(tp) / static_cast<double>(n_pos);
    const double fpr = static_cast<double>(fp) / static_cast<double>(n_neg);
    auc += (fpr - prev_fpr) * (tpr + prev_tpr) / 2.0;
    curve.points.push_back({score, fpr, tpr});
    prev_fpr = fpr;
    prev_tpr = tpr;
  }
  // The lowest threshold already classifies everything positive, so the
  // curve ends at (1,1) by construction.
  curve.auc = auc;
  return curve;
}

OperatingPoint youden_point(const RocCurve& curve) {
  OperatingPoint best;
  bool first = true;
  for (const auto& p : curve.points) {
    const double youden = p.tpr - p.fpr;
    if (first || youden > best.youden) {
      best = {p.threshold, p.tpr, p.fpr, youden};
      first = false;
    }
  }
  return best;
}

namespace {

EventReport make_report(const std::string& name,
                        std::span<const ScorePoint> points,
                        const std::set<std::int64_t>& expanded) {
  EventReport report;
  report.name = name;
  report.curve = roc(points, expanded);
  report.best = youden_point(report.curve);
  for (const auto& p : points) {
    if (expanded.count(p.t) > 0) ++report.positives;
    else ++report.negatives;
  }
  return report;
}

}  // namespace

EvalReport evaluate_series(std::span<const EventSeries> events, int tau) {
  EvalReport report;
  report.tau = tau;

  // Pooled triples keep a per-event offset so composite window ids stay
  // unique across events.
  std::vector<ScorePoint> pooled;
  std::set<std::int64_t> pooled_truth;
  std::int64_t offset = 0;

  for (const EventSeries& ev : events) {
    if (ev.points.empty()) {
      throw std::invalid_argument("evaluate_series: empty series for " +
                                  ev.name);
    }
    std::int64_t lo = ev.points.front().t, hi = ev.points.front().t;
    for (const auto& p : ev.points) {
      lo = std::min(lo, p.t);
      hi = std::max(hi, p.t);
    }
    const auto expanded = expand_truth(ev.moments, tau, lo, hi);
    report.per_event.push_back(make_report(ev.name, ev.points, expanded));

    for (const auto& p : ev.points) {
      pooled.push_back({p.t + offset, p.score});
      if (expanded.count(p.t) > 0) pooled_truth.insert(p.t + offset);
    }
    offset += (hi - lo + 1);
  }
  report.composite = make_report("composite", pooled, pooled_truth);
  return report;
}

void write_roc_csv(std::ostream& out, const RocCurve& curve) {
  out << "threshold,fpr,tpr\n";
  for (const auto& p : curve.points) {
    if (std::isinf(p.threshold)) {
      out << (p.threshold > 0 ? "inf" : "-inf");
    } else {
      out << format_double(p.threshold);
    }
    out << ',' << format_double(p.fpr) << ',' << format_double(p.tpr) << '\n';
  }
}

std::string report_to_json(const EvalReport& report) {
  using nlohmann::json;
  auto event_json = [](const EventReport& e) {
    return json{{"name", e.name},
                {"auc", e.curve.auc},
                {"positives", e.positives},
                {"negatives", e.negatives},
                {"operating_point",
                 json{{"threshold", e.best.threshold},
                      {"tpr", e.best.tpr},
                      {"fpr", e.best.fpr},
                      {"youden", e.best.youden}}}};
  };
  json events = json::array();
  for (const auto& e : report.per_event) events.push_back(event_json(e));
  const json doc{{"tau", report.tau},
                 {"events", std::move(events)},
                 {"composite", event_json(report.composite)}};
  return doc.dump(2);
}

AblationReport ablate(const std::vector<LabeledExample>& examples,
                      const AdaBoostConfig& cfg, int folds,
                      std::uint64_t seed, int threads) {
  const Dataset data = to_dataset(examples);
  std::size_t n_pos = 0, n_neg = 0;
  for (int y : data.y) (y > 0 ? n_pos : n_neg) += 1;
  const int usable =
      std::min<int>(folds, static_cast<int>(std::min(n_pos, n_neg)));
  if (usable < 2) {
    throw std::invalid_argument("ablate: need >= 2 examples per class");
  }
  const auto fold = stratified_folds(data.y, usable, seed);

  auto cv_auc = [&](std::span<const int> mask) {
    double sum = 0.0;
    int used = 0;
    for (int f = 0; f < usable; ++f) {
      Dataset train_set;
      train_set.dims = data.dims;
      std::vector<std::size_t> held;
      for (std::size_t i = 0; i < data.rows(); ++i) {
        if (fold[i] == f) held.push_back(i);
        else train_set.add_row(data.row(i), data.y[i]);
      }
      bool held_pos = false, held_neg = false;
      for (auto i : held) (data.y[i] > 0 ? held_pos : held_neg) = true;
      if (held.empty() || !held_pos || !held_neg ||
          !train_set.has_both_classes()) {
        continue;
      }
      AdaBoostConfig fold_cfg = cfg;
      fold_cfg.rng_seed = Rng::mix(seed, 0xab1 + static_cast<std::uint64_t>(f));
      const auto model = train_adaboost(train_set, fold_cfg, mask, threads);
      std::vector<ScorePoint> points;
      std::set<std::int64_t> truth;
      for (std::size_t j = 0; j < held.size(); ++j) {
        points.push_back({static_cast<std::int64_t>(j),
                          model.predict_score(data.row(held[j]))});
        if (data.y[held[j]] > 0) truth.insert(static_cast<std::int64_t>(j));
      }
      sum += roc(points, truth).auc;
      ++used;
    }
    if (used == 0) throw std::runtime_error("ablate: no usable folds");
    return sum / used;
  };

  AblationReport report;
  report.full_auc = cv_auc(full_feature_mask());
  for (int fam = 0; fam < kFeatureFamilyCount; ++fam) {
    const auto family = static_cast<FeatureFamily>(fam);
    const auto mask = mask_excluding(family);
    AblationRow row;
    row.family = kFeatureFamilyNames[fam];
    row.mean_auc = cv_auc(mask);
    row.diff_vs_full = row.mean_auc - report.full_auc;
    report.rows.push_back(std::move(row));
  }
  report.star_mask = mask_excluding(FeatureFamily::AverageDifference);
  return report;
}

}  // namespace laburst
