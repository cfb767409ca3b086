#include "ovsg/query.hpp"

#include <map>
#include <optional>
#include <regex>
#include <sstream>

#include "ovsg/errors.hpp"

namespace ovsg {

namespace {

const std::regex& target_pattern() {
  static const std::regex re(R"(^\s*target\s*@\s*(.+?)\s*\{\s*([A-Za-z]+)\s*\}\s*$)", std::regex::icase);
  return re;
}

const std::regex& relation_pattern() {
  static const std::regex re(
      R"(^\s*(.+?)\s*\{\s*([A-Za-z]+)\s*\}\s*--\s*(.+?)\s*\[\s*([A-Za-z]+)\s*\]\s*--\s*(.+?)\s*\{\s*([A-Za-z]+)\s*\}\s*$)");
  return re;
}

NodeKind node_kind_token(const std::string& token, std::size_t line) {
  const std::string t = normalize_text(token);
  if (t == "object") return NodeKind::Object;
  if (t == "user" || t == "agent") return NodeKind::Agent;
  if (t == "region") return NodeKind::Region;
  throw ParseError("unknown node type '{" + token + "}'", line);
}

RelationKind relation_kind_token(const std::string& token, std::size_t line) {
  const std::string t = normalize_text(token);
  if (t == "spatial") return RelationKind::Spatial;
  if (t == "abstract" || t == "user") return RelationKind::Abstract;
  throw ParseError("unknown relation type '[" + token + "]'", line);
}

std::string_view node_kind_token(NodeKind kind) {
  switch (kind) {
    case NodeKind::Object:
      return "object";
    case NodeKind::Agent:
      return "user";
    case NodeKind::Region:
      return "region";
  }
  return "object";
}

bool is_fence(std::string_view line) {
  const std::string t = normalize_text(line);
  return t.rfind("```", 0) == 0 || t.rfind("'''", 0) == 0;
}

struct Line {
  std::size_t number;
  std::string text;
};

// Lines to parse: everything, or only fenced content when fences are present.
std::vector<Line> dsl_lines(std::string_view text) {
  std::vector<Line> all;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t number = 0;
  bool fenced = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    ++number;
    fenced = fenced || is_fence(line);
    all.push_back({number, line});
  }
  std::vector<Line> out;
  bool inside = !fenced;
  for (auto& l : all) {
    if (is_fence(l.text)) {
      inside = !inside;
      continue;
    }
    if (inside && !normalize_text(l.text).empty()) out.push_back(std::move(l));
  }
  return out;
}

class StructureBuilder {
 public:
  explicit StructureBuilder(const QueryContext& ctx) : ctx_(ctx) {
    if (!ctx_.embedder || !ctx_.vocabulary) {
      throw ConfigError("query parsing needs an embedder and a spatial vocabulary");
    }
  }

  std::size_t node(const std::string& raw_name, NodeKind kind, std::size_t line) {
    const std::string name = normalize_text(raw_name);
    if (name.empty()) throw ParseError("empty node name", line);
    const auto key = std::make_pair(name, kind);
    if (const auto it = index_.find(key); it != index_.end()) return it->second;
    try {
      out_.nodes.push_back(QueryNode{name, kind, ctx_.embedder->embed(node_space(kind), name)});
    } catch (const UnencodableText& e) {
      throw ParseError(e.what(), line);
    }
    index_.emplace(key, out_.nodes.size() - 1);
    return out_.nodes.size() - 1;
  }

  Relationship relationship(const std::string& raw_text, RelationKind kind, std::size_t line) {
    const std::string text = normalize_text(raw_text);
    if (kind == RelationKind::Spatial) {
      try {
        return Relationship::requested(ctx_.vocabulary->resolve(text, ctx_.embedder));
      } catch (const UnknownSpatialRelation& e) {
        throw UnknownSpatialRelation("line " + std::to_string(line) + ": " + e.what());
      }
    }
    try {
      return Relationship::abstract(text, ctx_.embedder->embed(Space::Abstract, text));
    } catch (const UnencodableText& e) {
      throw ParseError(e.what(), line);
    }
  }

  ParsedQuery build(std::string_view text) {
    std::optional<std::size_t> target;
    std::size_t target_line = 0;
    std::smatch m;
    for (const Line& l : dsl_lines(text)) {
      if (std::regex_match(l.text, m, target_pattern())) {
        if (target) {
          throw ParseError("second target line (first on line " + std::to_string(target_line) + ")",
                           l.number);
        }
        target = node(m[1].str(), node_kind_token(m[2].str(), l.number), l.number);
        target_line = l.number;
      } else if (std::regex_match(l.text, m, relation_pattern())) {
        const NodeKind src_kind = node_kind_token(m[2].str(), l.number);
        const RelationKind rel_kind = relation_kind_token(m[4].str(), l.number);
        const NodeKind dst_kind = node_kind_token(m[6].str(), l.number);
        const std::size_t src = node(m[1].str(), src_kind, l.number);
        const std::size_t dst = node(m[5].str(), dst_kind, l.number);
        if (src == dst) throw ParseError("relation from a node to itself", l.number);
        out_.relations.push_back(ParsedRelation{
            l.number, src, dst, relationship(m[3].str(), rel_kind, l.number), normalize_text(l.text)});
      } else {
        throw ParseError("unrecognized line '" + normalize_text(l.text) + "'", l.number);
      }
    }
    if (!target) throw ParseError("query has no 'target @' line");
    out_.target = *target;
    return std::move(out_);
  }

 private:
  const QueryContext& ctx_;
  ParsedQuery out_;
  std::map<std::pair<std::string, NodeKind>, std::size_t> index_;
};

bool same_relationship(const Relationship& a, const Relationship& b) {
  return a.kind == b.kind && a.label == b.label && a.feature == b.feature &&
         a.descriptor == b.descriptor && a.signature == b.signature;
}

bool same_node(const QueryNode& a, const QueryNode& b) {
  return a.name == b.name && a.kind == b.kind && a.feature == b.feature;
}

}  // namespace

ParsedQuery parse_query_structure(std::string_view text, const QueryContext& ctx) {
  return StructureBuilder(ctx).build(text);
}

QueryGraph extract_star(const ParsedQuery& parsed) {
  QueryGraph q{parsed.nodes.at(parsed.target), {}, {}, {}};
  std::map<std::size_t, std::size_t> leaf_of;
  for (const auto& rel : parsed.relations) {
    std::size_t other;
    Direction dir;
    if (rel.src == parsed.target) {
      other = rel.dst;
      dir = Direction::CenterToLeaf;
    } else if (rel.dst == parsed.target) {
      other = rel.src;
      dir = Direction::LeafToCenter;
    } else {
      q.warnings.push_back("line " + std::to_string(rel.line) + ": dropped '" + rel.text +
                           "' (not incident to the target)");
      continue;
    }
    auto [it, inserted] = leaf_of.try_emplace(other, q.leaves.size());
    if (inserted) q.leaves.push_back(parsed.nodes.at(other));
    q.leaf_edges.push_back(LeafEdge{it->second, dir, rel.relationship});
  }
  return q;
}

QueryGraph parse_query(std::string_view text, const QueryContext& ctx) {
  return extract_star(parse_query_structure(text, ctx));
}

std::string to_dsl(const QueryGraph& q) {
  auto node_text = [](const QueryNode& n) {
    return n.name + " {" + std::string(node_kind_token(n.kind)) + "}";
  };
  std::ostringstream out;
  out << "target @ " << node_text(q.center) << "\n";
  for (const auto& e : q.leaf_edges) {
    const QueryNode& leaf = q.leaves.at(e.leaf);
    const Relationship& r = e.relationship;
    const std::string rel_text = r.descriptor ? r.descriptor->raw_text : r.label.value_or("");
    const std::string middle =
        " -- " + rel_text + " [" + std::string(to_string(r.kind)) + "] -- ";
    if (e.direction == Direction::CenterToLeaf) {
      out << node_text(q.center) << middle << node_text(leaf) << "\n";
    } else {
      out << node_text(leaf) << middle << node_text(q.center) << "\n";
    }
  }
  return out.str();
}

bool structurally_equal(const QueryGraph& a, const QueryGraph& b) {
  if (!same_node(a.center, b.center) || a.leaves.size() != b.leaves.size() ||
      a.leaf_edges.size() != b.leaf_edges.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.leaves.size(); ++i) {
    if (!same_node(a.leaves[i], b.leaves[i])) return false;
  }
  for (std::size_t i = 0; i < a.leaf_edges.size(); ++i) {
    const auto& x = a.leaf_edges[i];
    const auto& y = b.leaf_edges[i];
    if (x.leaf != y.leaf || x.direction != y.direction ||
        !same_relationship(x.relationship, y.relationship)) {
      return false;
    }
  }
  return true;
}

}  // namespace ovsg
