#include <gtest/gtest.h>

#include <random>
#include <set>

#include "json.hpp"
#include "ovsg/errors.hpp"
#include "ovsg/eval.hpp"
#include "support.hpp"

using namespace ovsg;
using namespace ovsg::testing;

namespace {

// Record whose Likelihood ranking has the given box IoUs, best-first order irrelevant.
EvalRecord record_with(std::vector<double> ious) {
  EvalRecord r;
  r.query_id = "q";
  r.gt_id = "gt";
  r.gt_bbox = box(0, 0, 0, 1, 1, 1);
  auto& hits = r.ranked[Method::Likelihood];
  for (std::size_t i = 0; i < ious.size(); ++i) {
    hits.push_back(RankedHit{"n" + std::to_string(i), 1.0 - 0.1 * static_cast<double>(i), ious[i], ious[i]});
  }
  r.gt_points = std::vector<std::uint32_t>{1};
  return r;
}

std::string unique_label_scene(int n) {
  nlohmann::json objects = nlohmann::json::array();
  for (int i = 0; i < n; ++i) {
    const double x = 5.0 * i;
    objects.push_back({{"id", "o" + std::to_string(100 + i)},
                       {"label", "item" + std::to_string(i)},
                       {"bbox", {{"min", {x, 0, 0}}, {"max", {x + 1, 1, 1}}}},
                       {"point_indices", {i}}});
  }
  return nlohmann::json{{"scene_id", "unique"}, {"objects", objects}}.dump();
}

const SceneGraph& distractor_scene() {
  static const SceneGraph g = parse_scene(distractor_scene_json(5), stub_embedder(), vocabulary());
  return g;
}

}  // namespace

TEST(Iou3d, SetArithmetic) {
  std::vector<std::uint32_t> a, b;
  for (std::uint32_t i = 0; i < 100; ++i) a.push_back(i);
  for (std::uint32_t i = 50; i < 150; ++i) b.push_back(i);
  EXPECT_NEAR(iou_3d(a, b), 1.0 / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(iou_3d(a, a), 1.0);
  EXPECT_DOUBLE_EQ(iou_3d({1, 2}, {3, 4}), 0.0);
  EXPECT_DOUBLE_EQ(iou_3d({}, {}), 1.0);
  EXPECT_DOUBLE_EQ(iou_3d({}, {4}), 0.0);
}

TEST(SuccessRate, CountsAtThreshold) {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 10; ++i) records.push_back(record_with({i < 6 ? 0.8 : 0.1}));
  EXPECT_DOUBLE_EQ(success_rate(records, Method::Likelihood, Metric::BB, 1, 0.5), 60.0);

  std::vector<EvalRecord> perfect(10, record_with({1.0}));
  EXPECT_DOUBLE_EQ(success_rate(perfect, Method::Likelihood, Metric::BB, 1, 0.5), 100.0);
}

TEST(SuccessRate, TopThreeRecoversLaterHits) {
  std::vector<EvalRecord> records;
  for (int i = 0; i < 10; ++i) {
    if (i < 4) records.push_back(record_with({0.9, 0.0, 0.0}));
    else if (i < 6) records.push_back(record_with({0.0, 0.0, 0.7}));
    else records.push_back(record_with({0.0, 0.1, 0.2}));
  }
  EXPECT_DOUBLE_EQ(success_rate(records, Method::Likelihood, Metric::BB, 1, 0.5), 40.0);
  EXPECT_DOUBLE_EQ(success_rate(records, Method::Likelihood, Metric::BB, 3, 0.5), 60.0);
}

TEST(SuccessRate, BoxesInclusivePointsStrict) {
  const std::vector<EvalRecord> records{record_with({0.5})};
  EXPECT_DOUBLE_EQ(success_rate(records, Method::Likelihood, Metric::BB, 1, 0.5), 100.0);
  EXPECT_DOUBLE_EQ(success_rate(records, Method::Likelihood, Metric::Points, 1, 0.5), 0.0);
}

TEST(SuccessRate, Errors) {
  EXPECT_THROW(success_rate({}, Method::Likelihood, Metric::BB, 1, 0.5), ConfigError);
  const std::vector<EvalRecord> records{record_with({0.5})};
  EXPECT_THROW(success_rate(records, Method::Likelihood, Metric::BB, 1, 0.0), ConfigError);
  EXPECT_THROW(success_rate(records, Method::Likelihood, Metric::BB, 1, 1.5), ConfigError);
  EvalRecord no_points = record_with({0.9});
  no_points.gt_points.reset();
  EXPECT_FALSE(best_iou(no_points, Method::Likelihood, Metric::Points, 1).has_value());
  EXPECT_THROW(success_rate({no_points}, Method::Likelihood, Metric::Points, 1, 0.5), ConfigError);
}

TEST(SuccessRate, FailedRecordsScoreZero) {
  EvalRecord failed = record_with({});
  failed.failed = true;
  EXPECT_EQ(best_iou(failed, Method::Likelihood, Metric::BB, 3).value(), 0.0);
  EXPECT_DOUBLE_EQ(success_rate({failed, record_with({1.0})}, Method::Likelihood, Metric::BB, 1, 0.5), 50.0);
}

TEST(SuccessRate, MonotoneInKAndThreshold) {
  std::mt19937_64 rng(12);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<EvalRecord> records;
    const int n = 1 + static_cast<int>(u(rng) * 30);
    for (int i = 0; i < n; ++i) {
      std::vector<double> ious;
      const int hits = static_cast<int>(u(rng) * 4);
      for (int h = 0; h < hits; ++h) ious.push_back(u(rng) < 0.2 ? 1.0 : u(rng));
      records.push_back(record_with(ious));
    }
    for (Metric m : {Metric::BB, Metric::Points}) {
      double prev = 101.0;
      for (double t : {0.05, 0.25, 0.5, 0.5000001, 0.75, 1.0}) {
        const double top1 = success_rate(records, Method::Likelihood, m, 1, t);
        const double top3 = success_rate(records, Method::Likelihood, m, 3, t);
        EXPECT_LE(top1, prev);
        EXPECT_GE(top3, top1);
        EXPECT_GE(top1, 0.0);
        EXPECT_LE(top3, 100.0);
        prev = top1;
      }
    }
  }
}

TEST(Corpus, RoundTripAndDefaults) {
  const std::vector<CorpusEntry> corpus{{"a", "target @ cup {object}", "o1"},
                                        {"b", "target @ plate {object}\nplate {object} -- on [spatial] -- t {object}", "o2"}};
  const std::string text = serialize_corpus(corpus);
  const auto back = parse_corpus(text);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].query, corpus[1].query);
  EXPECT_EQ(back[1].gt_id, "o2");

  const auto defaulted = parse_corpus("\n{\"query\": \"target @ cup {object}\", \"gt_id\": \"o1\"}\n");
  ASSERT_EQ(defaulted.size(), 1u);
  EXPECT_FALSE(defaulted[0].query_id.empty());

  try {
    parse_corpus("{\"query\": \"x\", \"gt_id\": \"o\"}\n{broken");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  EXPECT_THROW(load_corpus("/nonexistent/corpus.jsonl"), ConfigError);
}

TEST(RunEval, PerfectGroundingOnUniqueLabels) {
  const SceneGraph scene = parse_scene(unique_label_scene(50), stub_embedder(), vocabulary());
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 50; ++i) {
    corpus.push_back({"q" + std::to_string(i), "target @ item" + std::to_string(i) + " {object}",
                      "o" + std::to_string(100 + i)});
  }
  const Report r = run_eval(scene, corpus, {Method::Likelihood}, MatchParams{}, stub_context());
  const MethodReport& m = r.methods.at(Method::Likelihood);
  EXPECT_DOUBLE_EQ(m.top1.sr_bb, 100.0);
  EXPECT_DOUBLE_EQ(m.top1.iou_bb, 1.0);
  EXPECT_DOUBLE_EQ(m.top1.sr_3d.value(), 100.0);
  EXPECT_EQ(m.evaluated, 50u);
  EXPECT_EQ(m.failed, 0u);
}

TEST(RunEval, MalformedQueryIsCountedAsFailed) {
  const SceneGraph scene = parse_scene(unique_label_scene(10), stub_embedder(), vocabulary());
  std::vector<CorpusEntry> corpus;
  for (int i = 0; i < 10; ++i) {
    corpus.push_back({"q" + std::to_string(i), "target @ item" + std::to_string(i) + " {object}",
                      "o" + std::to_string(100 + i)});
  }
  corpus[3].query = "target @ item3 {object}\nitem3 {object} -- like [spatial] -- item4 {object}";
  const Report r = run_eval(scene, corpus, {Method::Likelihood, Method::SemanticOnly}, MatchParams{},
                            stub_context());
  for (Method method : {Method::Likelihood, Method::SemanticOnly}) {
    const MethodReport& m = r.methods.at(method);
    EXPECT_EQ(m.queries, 10u);
    EXPECT_EQ(m.evaluated, 9u);
    EXPECT_EQ(m.failed, 1u);
    EXPECT_DOUBLE_EQ(m.top1.sr_bb, 90.0);
  }
  EXPECT_TRUE(r.records[3].failed);
  EXPECT_FALSE(r.records[3].error.empty());
}

TEST(RunEval, RejectsUnknownGroundTruth) {
  const SceneGraph scene = parse_scene(unique_label_scene(2), stub_embedder(), vocabulary());
  EXPECT_THROW(run_eval(scene, {{"q", "target @ item0 {object}", "nope"}}, {Method::Likelihood},
                        MatchParams{}, stub_context()),
               ConfigError);
}

TEST(RunEval, JobsDoNotChangeTheReport) {
  const SceneGraph& scene = distractor_scene();
  GeneratorOptions opts;
  opts.min_distractors = 3;
  const auto corpus = generate_queries(scene, 40, 3, vocabulary(), opts);
  const std::vector<Method> methods{Method::Likelihood, Method::Jaccard, Method::SemanticOnly};
  const std::string serial =
      report_json(run_eval(scene, corpus, methods, MatchParams{}, stub_context(), {0.5, 1}));
  const std::string parallel =
      report_json(run_eval(scene, corpus, methods, MatchParams{}, stub_context(), {0.5, 4}));
  EXPECT_EQ(serial, parallel);
  const auto j = nlohmann::json::parse(serial);
  EXPECT_TRUE(j.contains("likelihood"));
  EXPECT_TRUE(j["likelihood"]["top1"].contains("sr_bb"));
  EXPECT_TRUE(j["semantic"]["top3"].contains("iou_3d"));
}

TEST(RunEval, ContextBeatsSemanticsOnDistractors) {
  const SceneGraph& scene = distractor_scene();
  GeneratorOptions opts;
  opts.min_distractors = 3;
  const auto corpus = generate_queries(scene, 60, 11, vocabulary(), opts);
  const Report r = run_eval(scene, corpus, {Method::Likelihood, Method::SemanticOnly}, MatchParams{},
                            stub_context());
  EXPECT_DOUBLE_EQ(r.methods.at(Method::Likelihood).top1.sr_bb, 100.0);
  EXPECT_LE(r.methods.at(Method::SemanticOnly).top1.sr_bb, 70.0);
  EXPECT_GE(r.methods.at(Method::Likelihood).top3.sr_bb, r.methods.at(Method::Likelihood).top1.sr_bb);
}

TEST(Generator, DeterministicForSeed) {
  const SceneGraph& scene = distractor_scene();
  const auto a = serialize_corpus(generate_queries(scene, 30, 5, vocabulary()));
  const auto b = serialize_corpus(generate_queries(scene, 30, 5, vocabulary()));
  const auto c = serialize_corpus(generate_queries(scene, 30, 6, vocabulary()));
  EXPECT_EQ(a, b);
  EXPECT_NE(a, c);
}

TEST(Generator, SingleObjectInRegion) {
  const std::string doc = R"({
    "objects": [{"id": "x", "label": "Mug", "bbox": {"min": [0,0,0], "max": [0.1,0.1,0.1]}}],
    "regions": [{"id": "r", "name": "Pantry", "bbox": {"min": [-1,-1,-1], "max": [1,1,1]}}]})";
  const SceneGraph scene = parse_scene(doc, stub_embedder(), vocabulary());
  const auto corpus = generate_queries(scene, 3, 1, vocabulary());
  ASSERT_EQ(corpus.size(), 3u);
  for (const auto& e : corpus) {
    EXPECT_EQ(e.query, "target @ mug {object}\nmug {object} -- in [spatial] -- pantry {region}");
    EXPECT_EQ(e.gt_id, "x");
  }
}

TEST(Generator, NoEligibleTarget) {
  const std::string doc = R"({
    "objects": [{"id": "x", "label": "mug", "bbox": {"min": [0,0,0], "max": [0.1,0.1,0.1]}}]})";
  const SceneGraph scene = parse_scene(doc, stub_embedder(), vocabulary());
  EXPECT_THROW(generate_queries(scene, 3, 1, vocabulary()), ConfigError);
  GeneratorOptions opts;
  opts.min_distractors = 6;
  EXPECT_THROW(generate_queries(distractor_scene(), 3, 1, vocabulary(), opts), ConfigError);
}

TEST(Generator, QueriesReferenceTrueRelationsAndReparse) {
  const SceneGraph scene = parse_scene(distractor_scene_json(4), stub_embedder(), vocabulary());
  ASSERT_GE(scene.nodes().size(), 20u);
  const auto corpus = generate_queries(scene, 200, 77, vocabulary());
  ASSERT_EQ(corpus.size(), 200u);
  std::set<std::string> ids;
  for (const auto& entry : corpus) {
    ids.insert(entry.query_id);
    const QueryGraph q = parse_query(entry.query, stub_context());
    EXPECT_TRUE(q.warnings.empty()) << entry.query;
    ASSERT_GE(q.leaves.size(), 1u) << entry.query;
    EXPECT_LE(q.leaves.size(), 3u);
    const SceneNode& gt = scene.node(entry.gt_id);
    EXPECT_EQ(q.center.name, *gt.label);

    // Every leaf must name a neighbor of the ground truth, linked the stated way.
    const StarView star = local_star(scene, entry.gt_id);
    for (const auto& e : q.leaf_edges) {
      const QueryNode& leaf = q.leaves[e.leaf];
      bool found = false;
      for (const auto& nb : star.neighbors) {
        if (nb.node->kind != leaf.kind || normalize_text(*nb.node->label) != leaf.name) continue;
        const auto* rels = e.direction == Direction::CenterToLeaf ? nb.outgoing : nb.incoming;
        if (!rels) continue;
        for (const auto& r : *rels) {
          if (r.kind != e.relationship.kind) continue;
          if (r.kind == RelationKind::Spatial) {
            found = found || spatial_distance(*r.signature, *e.relationship.descriptor) <= 0.5;
          } else {
            found = found || r.feature == e.relationship.feature;
          }
        }
      }
      EXPECT_TRUE(found) << entry.query;
    }
    const auto ranked = ground(scene, q, MatchParams{});
    ASSERT_FALSE(ranked.empty());
  }
  EXPECT_EQ(ids.size(), 200u);
}

TEST(Generator, RespectsKindMix) {
  GeneratorOptions opts;
  opts.allow_abstract = false;
  opts.allow_region = false;
  for (const auto& e : generate_queries(distractor_scene(), 50, 2, vocabulary(), opts)) {
    EXPECT_EQ(e.query.find("[abstract]"), std::string::npos);
    EXPECT_EQ(e.query.find("{region}"), std::string::npos);
    EXPECT_EQ(e.query.find("{user}"), std::string::npos);
  }
}
