#include "ovsg/cli.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "ovsg/errors.hpp"
#include "ovsg/eval.hpp"
#include "ovsg/matching.hpp"
#include "ovsg/query.hpp"
#include "ovsg/scene_io.hpp"

namespace ovsg::cli {

namespace {

using nlohmann::json;

struct EmbedFlags {
  std::vector<std::string> tables;
  bool no_stub = false;
  int stub_dim = 128;
  double floor = 0.75;
  std::string vocab = default_vocabulary_path().string();
};

struct MatchFlags {
  MatchParams params;
  std::size_t cap = 0;
  std::vector<std::string> methods;
};

void add_embed_flags(CLI::App* app, EmbedFlags& f) {
  app->add_option("--table", f.tables, "Embedding table for one space, as SPACE=PATH");
  app->add_flag("--no-stub", f.no_stub, "Disable the hashed fallback embedder");
  app->add_option("--stub-dim", f.stub_dim, "Dimension of stub vectors")->capture_default_str();
  app->add_option("--floor", f.floor, "Cosine floor for snapping to table entries")
      ->capture_default_str();
  app->add_option("--vocab", f.vocab, "Spatial vocabulary file")->capture_default_str();
}

void add_spatial_flags(CLI::App* app, SpatialParams& p) {
  app->add_option("--contact-tol", p.contact_tol, "Vertical gap still counted as contact")
      ->capture_default_str();
  app->add_option("--near-scale", p.near_scale, "Near range in mean box diagonals")
      ->capture_default_str();
  app->add_option("--keep-floor", p.keep_floor, "Weakest margin that creates an edge")
      ->capture_default_str();
  app->add_option("--support-overlap", p.support_overlap, "Footprint overlap for full On")
      ->capture_default_str();
}

void add_match_flags(CLI::App* app, MatchFlags& f, const char* default_method) {
  f.methods = {default_method};
  app->add_option("--method", f.methods, "likelihood, jaccard, simpson or semantic (repeatable)")
      ->delimiter(',');
  app->add_option("--sigma-v", f.params.sigma_v)->capture_default_str();
  app->add_option("--sigma-e", f.params.sigma_e)->capture_default_str();
  app->add_option("--eps-v", f.params.eps_v)->capture_default_str();
  app->add_option("--eps-e", f.params.eps_e)->capture_default_str();
  app->add_option("--top-k", f.params.top_k)->capture_default_str();
  app->add_option("--cap", f.cap, "Candidate cap (0 keeps every candidate)");
  app->add_flag("--injective", f.params.injective, "One-to-one leaf association");
}

std::vector<Method> methods_of(const MatchFlags& f) {
  std::vector<Method> out;
  for (const auto& m : f.methods) {
    const Method parsed = parse_method(m);
    if (std::find(out.begin(), out.end(), parsed) == out.end()) out.push_back(parsed);
  }
  if (out.empty()) throw ConfigError("no method given");
  return out;
}

MatchParams params_of(const MatchFlags& f) {
  MatchParams p = f.params;
  if (f.cap > 0) p.candidate_cap = f.cap;
  p.validate();
  return p;
}

struct Context {
  Embedder embedder;
  SpatialVocabulary vocabulary;

  QueryContext query_context() const { return {&embedder, &vocabulary}; }
};

Context make_context(const EmbedFlags& f) {
  EmbedderOptions opts = EmbedderOptions::from_env();
  opts.stub_enabled = !f.no_stub;
  opts.stub_dim = f.stub_dim;
  opts.snap_floor = f.floor;
  if (opts.stub_dim <= 0) throw ConfigError("--stub-dim must be positive");
  if (!(opts.snap_floor >= -1.0 && opts.snap_floor <= 1.0)) {
    throw ConfigError("--floor must lie in [-1, 1]");
  }
  Context ctx{Embedder(opts), {}};
  for (const auto& entry : f.tables) {
    const auto eq = entry.find('=');
    if (eq == std::string::npos) throw ConfigError("--table expects SPACE=PATH, got '" + entry + "'");
    const Space space = parse_space(entry.substr(0, eq));
    const std::filesystem::path path = entry.substr(eq + 1);
    if (!std::filesystem::exists(path)) {
      throw ConfigError("embedding table for space '" + std::string(to_string(space)) +
                        "' not found: " + path.string());
    }
    EmbeddingTable table = load_embedding_table(path);
    if (table.space != space) {
      throw ConfigError(path.string() + " holds space '" + std::string(to_string(table.space)) +
                        "', expected '" + std::string(to_string(space)) + "'");
    }
    ctx.embedder.set_table(std::move(table));
  }
  ctx.vocabulary = load_spatial_vocabulary(f.vocab);
  return ctx;
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void emit(const std::string& text, const std::string& out_path, std::ostream& out) {
  if (out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(out_path, std::ios::binary);
  if (!file) throw ConfigError("cannot write " + out_path);
  file << text;
}

std::string query_text(const std::string& inline_query, const std::string& file) {
  if (!inline_query.empty() && !file.empty()) {
    throw ConfigError("give either --query or --query-file, not both");
  }
  if (!file.empty()) return read_text(file);
  if (inline_query.empty()) throw ConfigError("a query is required (--query or --query-file)");
  return inline_query;
}

json bbox_json(const Pose3D& p) {
  auto v = [](const Eigen::Vector3d& x) { return json::array({x.x(), x.y(), x.z()}); };
  return json{{"center", v(p.center)}, {"min", v(p.min_corner)}, {"max", v(p.max_corner)}};
}

json node_json(const QueryNode& n) {
  return json{{"name", n.name}, {"kind", std::string(to_string(n.kind))}};
}

json query_json(const QueryGraph& q) {
  json leaves = json::array();
  for (const auto& l : q.leaves) leaves.push_back(node_json(l));
  json edges = json::array();
  for (const auto& e : q.leaf_edges) {
    const Relationship& r = e.relationship;
    json je{{"leaf", e.leaf},
            {"direction", e.direction == Direction::CenterToLeaf ? "center_to_leaf" : "leaf_to_center"},
            {"kind", std::string(to_string(r.kind))}};
    if (r.descriptor) {
      je["text"] = r.descriptor->raw_text;
      json rels = json::array();
      for (auto rel : r.descriptor->relations) rels.push_back(std::string(to_string(rel)));
      je["relations"] = std::move(rels);
    } else if (r.label) {
      je["text"] = *r.label;
    }
    edges.push_back(std::move(je));
  }
  return json{{"center", node_json(q.center)},
              {"leaves", std::move(leaves)},
              {"edges", std::move(edges)},
              {"warnings", q.warnings}};
}

int cmd_build(const std::string& scene, const std::string& out_path, const EmbedFlags& ef,
              const SpatialParams& sp, std::ostream& out) {
  sp.validate();
  const Context ctx = make_context(ef);
  const SceneGraph graph = load_scene(scene, ctx.embedder, ctx.vocabulary, sp);
  emit(serialize_graph(graph), out_path, out);
  return kSuccess;
}

int cmd_parse(const std::string& text, const EmbedFlags& ef, std::ostream& out) {
  const Context ctx = make_context(ef);
  out << query_json(parse_query(text, ctx.query_context())).dump(2) << "\n";
  return kSuccess;
}

int cmd_ground(const std::string& graph_path, const std::string& text, const std::string& query_id,
               const std::string& out_path, const EmbedFlags& ef, const MatchFlags& mf,
               std::ostream& out, std::ostream& err) {
  const MatchParams base = params_of(mf);
  const std::vector<Method> methods = methods_of(mf);
  const Context ctx = make_context(ef);
  const SceneGraph graph = load_graph(graph_path);
  const QueryGraph query = parse_query(text, ctx.query_context());
  for (const auto& w : query.warnings) err << "warning: " << w << "\n";

  std::string lines;
  bool any = false;
  for (Method m : methods) {
    MatchParams p = base;
    p.method = m;
    const auto results = ground(graph, query, p);
    any = any || !results.empty();
    json ranked = json::array();
    for (const auto& r : results) {
      json jr{{"id", r.candidate_id}, {"score", r.score}};
      const SceneNode& n = graph.node(r.candidate_id);
      jr["bbox"] = n.pose ? bbox_json(*n.pose) : json(nullptr);
      ranked.push_back(std::move(jr));
    }
    const bool tie = results.size() > 1 && results[0].score == results[1].score;
    lines += json{{"query_id", query_id},
                  {"method", std::string(to_string(m))},
                  {"ranked", std::move(ranked)},
                  {"tie_at_top", tie}}
                 .dump() +
             "\n";
  }
  emit(lines, out_path, out);
  if (!any) {
    err << "no scene node matches the query target\n";
    return kEmptyResult;
  }
  return kSuccess;
}

int cmd_eval(const std::string& graph_path, const std::string& corpus_path, double threshold,
             std::size_t jobs, const std::string& out_path, const EmbedFlags& ef,
             const MatchFlags& mf, std::ostream& out) {
  const MatchParams params = params_of(mf);
  const std::vector<Method> methods = methods_of(mf);
  const Context ctx = make_context(ef);
  const SceneGraph graph = load_graph(graph_path);
  const auto corpus = load_corpus(corpus_path);
  const Report report =
      run_eval(graph, corpus, methods, params, ctx.query_context(), EvalOptions{threshold, jobs});
  emit(report_json(report), out_path, out);
  return kSuccess;
}

int cmd_gen_queries(const std::string& graph_path, std::size_t n, std::uint64_t seed,
                    const GeneratorOptions& opts, const std::string& vocab_path,
                    const std::string& out_path, std::ostream& out) {
  const SceneGraph graph = load_graph(graph_path);
  const SpatialVocabulary vocab = load_spatial_vocabulary(vocab_path);
  emit(serialize_corpus(generate_queries(graph, n, seed, vocab, opts)), out_path, out);
  return kSuccess;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Open-vocabulary scene graph grounding", "ovsg"};
  app.require_subcommand(1);

  std::function<int()> action;
  EmbedFlags ef;
  SpatialParams sp;
  MatchFlags mf;
  std::string scene, graph, query, query_file, query_id = "q0", out_path, corpus;
  bool parse_only = false;
  double threshold = 0.5;
  std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
  std::size_t n = 100;
  std::uint64_t seed = 0;
  GeneratorOptions gen;
  bool no_spatial = false, no_abstract = false, no_region = false;

  auto* build = app.add_subcommand("build", "Build a scene graph from a scene description");
  build->add_option("--scene", scene, "Scene description (JSON)")->required();
  build->add_option("--out", out_path, "Graph output file (default stdout)");
  add_embed_flags(build, ef);
  add_spatial_flags(build, sp);
  build->callback([&] { action = [&] { return cmd_build(scene, out_path, ef, sp, out); }; });

  auto* parse = app.add_subcommand("parse", "Parse a query and print its star graph as JSON");
  parse->add_option("--query", query, "Query DSL text");
  parse->add_option("--query-file", query_file, "File holding the query DSL");
  add_embed_flags(parse, ef);
  parse->callback([&] {
    action = [&] { return cmd_parse(query_text(query, query_file), ef, out); };
  });

  auto* grnd = app.add_subcommand("ground", "Ground one query in a built graph");
  grnd->add_option("--graph", graph, "Built graph file")->required();
  grnd->add_option("--query", query, "Query DSL text");
  grnd->add_option("--query-file", query_file, "File holding the query DSL");
  grnd->add_option("--query-id", query_id, "Identifier echoed in the output")->capture_default_str();
  grnd->add_option("--out", out_path, "JSONL output file (default stdout)");
  grnd->add_flag("--parse-only", parse_only, "Print the parsed query graph and stop");
  add_embed_flags(grnd, ef);
  add_match_flags(grnd, mf, "likelihood");
  grnd->callback([&] {
    action = [&] {
      const std::string text = query_text(query, query_file);
      if (parse_only) return cmd_parse(text, ef, out);
      return cmd_ground(graph, text, query_id, out_path, ef, mf, out, err);
    };
  });

  auto* ev = app.add_subcommand("eval", "Evaluate a query corpus");
  ev->add_option("--graph", graph, "Built graph file")->required();
  ev->add_option("--corpus", corpus, "JSONL corpus of {query_id, query, gt_id}")->required();
  ev->add_option("--threshold", threshold, "IoU success threshold")->capture_default_str();
  ev->add_option("--jobs", jobs, "Worker threads")->capture_default_str();
  ev->add_option("--out", out_path, "Report output file (default stdout)");
  add_embed_flags(ev, ef);
  add_match_flags(ev, mf, "likelihood");
  ev->callback([&] {
    action = [&] {
      if (jobs == 0) throw ConfigError("--jobs must be positive");
      return cmd_eval(graph, corpus, threshold, jobs, out_path, ef, mf, out);
    };
  });

  auto* gq = app.add_subcommand("gen-queries", "Generate a synthetic query corpus");
  gq->add_option("--graph", graph, "Built graph file")->required();
  gq->add_option("-n,--count", n, "Number of queries")->capture_default_str();
  gq->add_option("--seed", seed, "Random seed")->capture_default_str();
  gq->add_option("--min-leaves", gen.min_leaves)->capture_default_str();
  gq->add_option("--max-leaves", gen.max_leaves)->capture_default_str();
  gq->add_option("--min-distractors", gen.min_distractors,
                 "Only targets with this many same-label objects")
      ->capture_default_str();
  gq->add_option("--render-floor", gen.render_floor)->capture_default_str();
  gq->add_flag("--no-spatial", no_spatial);
  gq->add_flag("--no-abstract", no_abstract);
  gq->add_flag("--no-region", no_region);
  gq->add_option("--vocab", ef.vocab, "Spatial vocabulary file")->capture_default_str();
  gq->add_option("--out", out_path, "JSONL output file (default stdout)");
  gq->callback([&] {
    action = [&] {
      gen.allow_spatial = !no_spatial;
      gen.allow_abstract = !no_abstract;
      gen.allow_region = !no_region;
      return cmd_gen_queries(graph, n, seed, gen, ef.vocab, out_path, out);
    };
  });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kSuccess : kUsageError;
  }

  try {
    return action();
  } catch (const Error& e) {
    err << "ovsg: " << e.what() << "\n";
    return kUsageError;
  } catch (const std::exception& e) {
    err << "ovsg: " << e.what() << "\n";
    return kUsageError;
  }
}

}  // namespace ovsg::cli
