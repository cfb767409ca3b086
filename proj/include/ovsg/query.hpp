#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ovsg/embedding.hpp"
#include "ovsg/scene_graph.hpp"
#include "ovsg/spatial.hpp"

namespace ovsg {

/// Query-side node; `name` is case-folded and whitespace-normalized.
struct QueryNode {
  std::string name;
  NodeKind kind = NodeKind::Object;
  FeatureVec feature;
};

enum class Direction { CenterToLeaf, LeafToCenter };

struct LeafEdge {
  std::size_t leaf = 0;
  Direction direction = Direction::CenterToLeaf;
  Relationship relationship;
};

/// Star-shaped query: every edge touches the center.
struct QueryGraph {
  QueryNode center;
  std::vector<QueryNode> leaves;
  std::vector<LeafEdge> leaf_edges;
  /// Lines dropped while extracting the star (edges not touching the target).
  std::vector<std::string> warnings;

  std::size_t node_count() const { return 1 + leaves.size(); }
  std::size_t edge_count() const { return leaves.size(); }
};

/// A relation line as written, before star extraction.
struct ParsedRelation {
  std::size_t line = 0;
  std::size_t src = 0;  // index into ParsedQuery::nodes
  std::size_t dst = 0;
  Relationship relationship;
  std::string text;  // the source line, trimmed
};

/// Arbitrary (possibly non-star) structure parsed from the DSL.
struct ParsedQuery {
  std::vector<QueryNode> nodes;
  std::size_t target = 0;
  std::vector<ParsedRelation> relations;
};

/// Everything the parser needs to encode names and relations.
struct QueryContext {
  const Embedder* embedder = nullptr;
  const SpatialVocabulary* vocabulary = nullptr;
};

/// Parses the line-oriented DSL:
///
///   target @ <name> {<type>}
///   <name> {<type>} -- <relation> [<relation type>] -- <name> {<type>}
///
/// Blank lines are ignored. When the text contains ``` fences, only lines
/// inside a fenced block are read, so raw LLM answers can be passed through.
/// Errors are ParseError / UnknownSpatialRelation with the line number.
ParsedQuery parse_query_structure(std::string_view text, const QueryContext& ctx);

/// Keeps edges incident to the target. Repeated lines between the same pair
/// merge into one leaf; every dropped line is recorded as a warning.
QueryGraph extract_star(const ParsedQuery& parsed);

QueryGraph parse_query(std::string_view text, const QueryContext& ctx);

/// Renders a star back to DSL text; parse_query(to_dsl(q)) reproduces q.
std::string to_dsl(const QueryGraph& query);

/// Structural equality: names, kinds, features, directions, relations.
bool structurally_equal(const QueryGraph& a, const QueryGraph& b);

}  // namespace ovsg
