#include "ovsg/eval.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <iostream>
#include <iterator>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "ovsg/errors.hpp"

namespace ovsg {

using nlohmann::json;

double iou_3d(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b) {
  if (a.empty() && b.empty()) {
    std::clog << "ovsg: iou_3d of two empty index sets taken as 1\n";
    return 1.0;
  }
  std::vector<std::uint32_t> common;
  std::set_intersection(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(common));
  const double inter = static_cast<double>(common.size());
  return inter / (static_cast<double>(a.size() + b.size()) - inter);
}

std::optional<double> best_iou(const EvalRecord& record, Method method, Metric metric,
                               std::size_t k) {
  if (metric == Metric::Points && !record.gt_points) return std::nullopt;
  double best = 0.0;
  if (record.failed) return best;
  const auto it = record.ranked.find(method);
  if (it == record.ranked.end()) return best;
  const auto& hits = it->second;
  for (std::size_t i = 0; i < std::min(k, hits.size()); ++i) {
    const double v = metric == Metric::BB ? hits[i].iou_bb : hits[i].iou_3d.value_or(0.0);
    best = std::max(best, v);
  }
  return best;
}

double success_rate(const std::vector<EvalRecord>& records, Method method, Metric metric,
                    std::size_t k, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) throw ConfigError("threshold must lie in (0, 1]");
  std::size_t rated = 0;
  std::size_t hits = 0;
  for (const auto& r : records) {
    const auto v = best_iou(r, method, metric, k);
    if (!v) continue;
    ++rated;
    if (metric == Metric::BB ? *v >= threshold : *v > threshold) ++hits;
  }
  if (rated == 0) throw ConfigError("success rate of an empty record set is undefined");
  return 100.0 * static_cast<double>(hits) / static_cast<double>(rated);
}

std::vector<CorpusEntry> parse_corpus(const std::string& jsonl) {
  std::vector<CorpusEntry> out;
  std::istringstream in(jsonl);
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (normalize_text(line).empty()) continue;
    try {
      const json j = json::parse(line);
      CorpusEntry e;
      e.query_id = j.contains("query_id") ? j.at("query_id").get<std::string>()
                                          : std::to_string(out.size());
      e.query = j.at("query").get<std::string>();
      e.gt_id = j.at("gt_id").get<std::string>();
      out.push_back(std::move(e));
    } catch (const json::exception& e) {
      throw ParseError(std::string("malformed corpus entry: ") + e.what(), number);
    }
  }
  return out;
}

std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_corpus(ss.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

std::string serialize_corpus(const std::vector<CorpusEntry>& corpus) {
  std::string out;
  for (const auto& e : corpus) {
    out += json{{"query_id", e.query_id}, {"query", e.query}, {"gt_id", e.gt_id}}.dump();
    out += "\n";
  }
  return out;
}

namespace {

EvalRecord evaluate_one(const SceneGraph& scene, const CorpusEntry& entry,
                        const std::vector<Method>& methods, const MatchParams& params,
                        const QueryContext& ctx) {
  const SceneNode& gt = scene.node(entry.gt_id);
  EvalRecord rec{entry.query_id, entry.gt_id, *gt.pose, gt.point_indices, {}, false, {}};
  std::optional<QueryGraph> query;
  try {
    query = parse_query(entry.query, ctx);
  } catch (const Error& e) {
    rec.failed = true;
    rec.error = e.what();
    return rec;
  }
  for (Method m : methods) {
    MatchParams p = params;
    p.method = m;
    p.top_k = std::max<std::size_t>(params.top_k, 3);
    std::vector<RankedHit> hits;
    for (const auto& r : ground(scene, *query, p)) {
      const SceneNode& n = scene.node(r.candidate_id);
      RankedHit h{r.candidate_id, r.score, n.pose ? iou_bb(*n.pose, rec.gt_bbox) : 0.0,
                  std::nullopt};
      if (rec.gt_points) {
        h.iou_3d = iou_3d(n.point_indices.value_or(std::vector<std::uint32_t>{}), *rec.gt_points);
      }
      hits.push_back(std::move(h));
    }
    rec.ranked.emplace(m, std::move(hits));
  }
  return rec;
}

std::optional<double> mean_iou(const std::vector<EvalRecord>& records, Method method,
                               Metric metric, std::size_t k) {
  double sum = 0.0;
  std::size_t count = 0;
  for (const auto& r : records) {
    if (const auto v = best_iou(r, method, metric, k)) {
      sum += *v;
      ++count;
    }
  }
  if (count == 0) return std::nullopt;
  return sum / static_cast<double>(count);
}

TopKSummary summarize(const std::vector<EvalRecord>& records, Method method, std::size_t k,
                      double threshold) {
  TopKSummary s;
  s.iou_bb = mean_iou(records, method, Metric::BB, k).value_or(0.0);
  s.iou_3d = mean_iou(records, method, Metric::Points, k);
  if (!records.empty()) s.sr_bb = success_rate(records, method, Metric::BB, k, threshold);
  if (s.iou_3d) s.sr_3d = success_rate(records, method, Metric::Points, k, threshold);
  return s;
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json summary_json(const TopKSummary& s) {
  return json{{"iou_bb", s.iou_bb},
              {"iou_3d", optional_number(s.iou_3d)},
              {"sr_bb", s.sr_bb},
              {"sr_3d", optional_number(s.sr_3d)}};
}

}  // namespace

Report run_eval(const SceneGraph& scene, const std::vector<CorpusEntry>& corpus,
                const std::vector<Method>& methods, const MatchParams& params,
                const QueryContext& ctx, const EvalOptions& options) {
  params.validate();
  if (!(options.threshold > 0.0 && options.threshold <= 1.0)) {
    throw ConfigError("threshold must lie in (0, 1]");
  }
  if (methods.empty()) throw ConfigError("no methods requested");
  for (const auto& e : corpus) {
    const SceneNode* gt = scene.find(e.gt_id);
    if (!gt) throw ConfigError("query '" + e.query_id + "': unknown gt id '" + e.gt_id + "'");
    if (!gt->pose) throw ConfigError("query '" + e.query_id + "': gt '" + e.gt_id + "' has no pose");
  }

  Report report;
  report.threshold = options.threshold;
  report.records.resize(corpus.size());
  std::vector<std::exception_ptr> errors(corpus.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < corpus.size(); i = next++) {
      try {
        report.records[i] = evaluate_one(scene, corpus[i], methods, params, ctx);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(options.jobs, 1, std::max<std::size_t>(corpus.size(), 1));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::size_t failed = 0;
  for (const auto& r : report.records) failed += r.failed ? 1 : 0;
  for (Method m : methods) {
    MethodReport mr;
    mr.top1 = summarize(report.records, m, 1, options.threshold);
    mr.top3 = summarize(report.records, m, 3, options.threshold);
    mr.queries = corpus.size();
    mr.failed = failed;
    mr.evaluated = corpus.size() - failed;
    report.methods.emplace(m, mr);
  }
  return report;
}

std::string report_json(const Report& report) {
  json out = json::object();
  for (const auto& [method, mr] : report.methods) {
    out[std::string(to_string(method))] = json{
        {"top1", summary_json(mr.top1)},
        {"top3", summary_json(mr.top3)},
        {"threshold", report.threshold},
        {"counts", {{"queries", mr.queries}, {"evaluated", mr.evaluated}, {"failed", mr.failed}}}};
  }
  return out.dump(2) + "\n";
}

}  // namespace ovsg
