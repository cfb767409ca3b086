#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ovsg/geometry.hpp"
#include "ovsg/matching.hpp"
#include "ovsg/query.hpp"
#include "ovsg/scene_graph.hpp"

namespace ovsg {

/// |a ∩ b| / |a ∪ b| over sorted, duplicate-free index lists; 1 when both
/// are empty.
double iou_3d(const std::vector<std::uint32_t>& a, const std::vector<std::uint32_t>& b);

enum class Metric { BB, Points };

struct RankedHit {
  NodeId id;
  double score = 0.0;
  double iou_bb = 0.0;
  std::optional<double> iou_3d;  // absent when the ground truth has no points
};

struct EvalRecord {
  std::string query_id;
  NodeId gt_id;
  Pose3D gt_bbox;
  std::optional<std::vector<std::uint32_t>> gt_points;
  std::map<Method, std::vector<RankedHit>> ranked;
  bool failed = false;  // the query did not parse; scored as IoU 0
  std::string error;
};

/// Best IoU among the first k hits of `method`; 0 for failed or empty.
/// nullopt for Metric::Points when the record has no ground-truth points.
std::optional<double> best_iou(const EvalRecord& record, Method method, Metric metric,
                               std::size_t k);

/// Percentage of records whose best top-k IoU is a success. Boxes succeed at
/// IoU >= threshold, point sets at IoU > threshold. Records without points are
/// skipped for Metric::Points. Throws ConfigError when nothing is left to rate
/// or the threshold is outside (0, 1].
double success_rate(const std::vector<EvalRecord>& records, Method method, Metric metric,
                    std::size_t k, double threshold);

struct CorpusEntry {
  std::string query_id;
  std::string query;
  NodeId gt_id;
};

/// One JSON object per line: {"query_id", "query", "gt_id"}. A missing
/// query_id defaults to the 0-based line index.
std::vector<CorpusEntry> parse_corpus(const std::string& jsonl);
std::vector<CorpusEntry> load_corpus(const std::filesystem::path& path);
std::string serialize_corpus(const std::vector<CorpusEntry>& corpus);

struct TopKSummary {
  double iou_bb = 0.0;
  std::optional<double> iou_3d;
  double sr_bb = 0.0;
  std::optional<double> sr_3d;
};

struct MethodReport {
  TopKSummary top1;
  TopKSummary top3;
  std::size_t queries = 0;
  std::size_t evaluated = 0;
  std::size_t failed = 0;
};

struct Report {
  double threshold = 0.5;
  std::map<Method, MethodReport> methods;
  std::vector<EvalRecord> records;  // input order
};

struct EvalOptions {
  double threshold = 0.5;
  std::size_t jobs = 1;
};

/// Grounds every corpus query with every method and aggregates. Queries that
/// fail to parse are recorded as failed rather than aborting the run.
/// Throws ConfigError for gt ids that are missing or unposed in the scene.
Report run_eval(const SceneGraph& scene, const std::vector<CorpusEntry>& corpus,
                const std::vector<Method>& methods, const MatchParams& params,
                const QueryContext& ctx, const EvalOptions& options = {});

/// {"<method>": {"top1": {...}, "top3": {...}, "counts": {...}}, ...}
std::string report_json(const Report& report);

struct GeneratorOptions {
  std::size_t min_leaves = 1;
  std::size_t max_leaves = 3;
  bool allow_spatial = true;
  bool allow_abstract = true;
  bool allow_region = true;
  /// Targets need at least this many other objects sharing their label.
  std::size_t min_distractors = 0;
  /// Weakest margin a rendered spatial relation set may have.
  double render_floor = 0.5;
};

/// Samples n grounded queries: a target object plus 1..3 distinct incident
/// neighbors rendered as DSL lines. Deterministic for a fixed seed.
/// Throws ConfigError when no object qualifies as a target.
std::vector<CorpusEntry> generate_queries(const SceneGraph& scene, std::size_t n,
                                          std::uint64_t seed, const SpatialVocabulary& vocabulary,
                                          const GeneratorOptions& options = {});

}  // namespace ovsg
