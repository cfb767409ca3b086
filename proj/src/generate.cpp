#include <algorithm>
#include <cstdio>
#include <map>
#include <random>

#include "ovsg/errors.hpp"
#include "ovsg/eval.hpp"

namespace ovsg {

namespace {

// Tie-break order among equally strong relation sets.
int relation_rank(SpatialRelation r) {
  switch (r) {
    case SpatialRelation::In: return 0;
    case SpatialRelation::On: return 1;
    case SpatialRelation::Above: return 2;
    case SpatialRelation::Under: return 3;
    case SpatialRelation::LeftOf: return 4;
    case SpatialRelation::RightOf: return 5;
    case SpatialRelation::InFrontOf: return 6;
    case SpatialRelation::Behind: return 7;
    case SpatialRelation::Near: return 8;
  }
  return 9;
}

std::vector<int> ranks(const RelationSet& set) {
  std::vector<int> out;
  for (auto r : set) out.push_back(relation_rank(r));
  std::sort(out.begin(), out.end());
  return out;
}

// Canonical phrase of the strongest relation set the signature satisfies.
std::optional<std::string> render_signature(const SpatialSignature& sig,
                                            const SpatialVocabulary& vocab, double floor) {
  const RelationSet* best = nullptr;
  double best_margin = 0.0;
  for (const auto& set : vocab.relation_sets()) {
    double margin = 1.0;
    for (auto r : set) margin = std::min(margin, sig[r]);
    if (margin < floor) continue;
    bool better = !best || margin > best_margin;
    if (best && margin == best_margin) {
      better = set.size() != best->size() ? set.size() > best->size() : ranks(set) < ranks(*best);
    }
    if (better) {
      best = &set;
      best_margin = margin;
    }
  }
  if (!best) return std::nullopt;
  return vocab.canonical_description(*best);
}

std::string kind_token(NodeKind kind) {
  switch (kind) {
    case NodeKind::Object: return "object";
    case NodeKind::Agent: return "user";
    case NodeKind::Region: return "region";
  }
  return "object";
}

std::string node_text(const SceneNode& n) { return normalize_text(*n.label) + " {" + kind_token(n.kind) + "}"; }

struct Reference {
  std::string key;                 // normalized label + kind; one line per key
  std::vector<std::string> lines;  // renderings of the edge to this neighbor
};

class Generator {
 public:
  Generator(const SceneGraph& scene, const SpatialVocabulary& vocab, const GeneratorOptions& opts)
      : scene_(scene), vocab_(vocab), opts_(opts) {}

  std::vector<Reference> references(const SceneNode& target) const {
    const std::string self = normalize_text(*target.label) + "|" + kind_token(target.kind);
    std::map<std::string, std::vector<Reference>> grouped;
    for (const NodeId& id : scene_.neighbors(target.id)) {
      const SceneNode& nb = scene_.node(id);
      if (!nb.label || normalize_text(*nb.label).empty()) continue;
      if (nb.kind == NodeKind::Region && !opts_.allow_region) continue;
      Reference ref{normalize_text(*nb.label) + "|" + kind_token(nb.kind), {}};
      if (ref.key == self) continue;
      add_lines(ref, target, nb, scene_.edge(target.id, nb.id));
      add_lines(ref, nb, target, scene_.edge(nb.id, target.id));
      if (!ref.lines.empty()) grouped[ref.key].push_back(std::move(ref));
    }
    std::vector<Reference> out;
    for (auto& [key, refs] : grouped) {
      // Neighbors sharing a label are interchangeable references; keep all
      // renderings under one key so one line is drawn per distinct reference.
      Reference merged{key, {}};
      for (auto& r : refs) merged.lines.insert(merged.lines.end(), r.lines.begin(), r.lines.end());
      out.push_back(std::move(merged));
    }
    return out;
  }

  bool eligible(const SceneNode& n) const {
    if (n.kind != NodeKind::Object || !n.label) return false;
    std::size_t twins = 0;
    for (const auto& [id, other] : scene_.nodes()) {
      if (id != n.id && other.kind == n.kind && other.label &&
          normalize_text(*other.label) == normalize_text(*n.label)) {
        ++twins;
      }
    }
    return twins >= opts_.min_distractors && references(n).size() >= opts_.min_leaves;
  }

 private:
  void add_lines(Reference& ref, const SceneNode& src, const SceneNode& dst,
                 const RelationEdge* edge) const {
    if (!edge) return;
    for (const auto& r : edge->relationships) {
      std::optional<std::string> text;
      if (r.kind == RelationKind::Abstract && opts_.allow_abstract && r.label) {
        text = normalize_text(*r.label) + " [abstract]";
      } else if (r.kind == RelationKind::Spatial && opts_.allow_spatial && r.signature) {
        if (auto phrase = render_signature(*r.signature, vocab_, opts_.render_floor)) {
          text = *phrase + " [spatial]";
        }
      }
      if (text) ref.lines.push_back(node_text(src) + " -- " + *text + " -- " + node_text(dst));
    }
  }

  const SceneGraph& scene_;
  const SpatialVocabulary& vocab_;
  const GeneratorOptions& opts_;
};

// Uniform index below n from a 64-bit stream; avoids the implementation-defined
// algorithms behind std::uniform_int_distribution.
std::size_t draw(std::mt19937_64& rng, std::size_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return static_cast<std::size_t>(x % n);
}

}  // namespace

std::vector<CorpusEntry> generate_queries(const SceneGraph& scene, std::size_t n,
                                          std::uint64_t seed, const SpatialVocabulary& vocabulary,
                                          const GeneratorOptions& options) {
  if (options.min_leaves == 0 || options.min_leaves > options.max_leaves) {
    throw ConfigError("leaf range must satisfy 1 <= min_leaves <= max_leaves");
  }
  if (!(options.render_floor > 0.0 && options.render_floor <= 1.0)) {
    throw ConfigError("render_floor must lie in (0, 1]");
  }
  const Generator gen(scene, vocabulary, options);
  std::vector<const SceneNode*> targets;
  for (const auto& [id, node] : scene.nodes()) {
    if (gen.eligible(node)) targets.push_back(&node);
  }
  if (targets.empty()) throw ConfigError("scene has no eligible query targets");

  std::mt19937_64 rng(seed);
  std::vector<CorpusEntry> out;
  for (std::size_t i = 0; i < n; ++i) {
    const SceneNode& target = *targets[draw(rng, targets.size())];
    std::vector<Reference> refs = gen.references(target);
    const std::size_t hi = std::min(options.max_leaves, refs.size());
    const std::size_t count = options.min_leaves + draw(rng, hi - options.min_leaves + 1);
    // Partial Fisher-Yates: the first `count` entries become the leaves.
    for (std::size_t k = 0; k < count; ++k) std::swap(refs[k], refs[k + draw(rng, refs.size() - k)]);

    std::string dsl = "target @ " + node_text(target);
    for (std::size_t k = 0; k < count; ++k) {
      const auto& lines = refs[k].lines;
      dsl += "\n" + lines[draw(rng, lines.size())];
    }
    char qid[32];
    std::snprintf(qid, sizeof qid, "q%04zu", i);
    out.push_back(CorpusEntry{qid, std::move(dsl), target.id});
  }
  return out;
}

}  // namespace ovsg
