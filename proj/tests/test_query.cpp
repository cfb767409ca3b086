#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "ovsg/errors.hpp"
#include "ovsg/query.hpp"
#include "support.hpp"

using namespace ovsg;
using namespace ovsg::testing;
using R = SpatialRelation;

namespace {

std::string fixture_text(const std::string& name) {
  std::ifstream in(kFixtures / "llm_answers" / name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

QueryGraph parse(const std::string& text) { return parse_query(text, stub_context()); }

}  // namespace

TEST(ParseQuery, CoffeeCupExample) {
  const QueryGraph q = parse(fixture_text("coffee_cup_zoro.txt"));
  EXPECT_EQ(q.center.name, "cup");
  EXPECT_EQ(q.center.kind, NodeKind::Object);
  ASSERT_EQ(q.leaves.size(), 4u);
  ASSERT_EQ(q.leaf_edges.size(), 4u);
  EXPECT_TRUE(q.warnings.empty());

  EXPECT_EQ(q.leaves[0].name, "zoro");
  EXPECT_EQ(q.leaves[0].kind, NodeKind::Agent);
  EXPECT_EQ(q.leaf_edges[0].direction, Direction::LeafToCenter);
  EXPECT_EQ(q.leaf_edges[0].relationship.kind, RelationKind::Abstract);
  EXPECT_EQ(q.leaf_edges[0].relationship.label, "like");

  EXPECT_EQ(q.leaves[1].name, "espresso machine");
  EXPECT_EQ(q.leaf_edges[1].direction, Direction::CenterToLeaf);
  EXPECT_EQ(q.leaf_edges[1].relationship.descriptor->relations, RelationSet{R::RightOf});

  EXPECT_EQ(q.leaves[2].name, "trash can");
  EXPECT_EQ(q.leaf_edges[2].direction, Direction::CenterToLeaf);
  EXPECT_EQ(q.leaf_edges[2].relationship.descriptor->relations, RelationSet{R::LeftOf});

  EXPECT_EQ(q.leaves[3].name, "coffee kettle");
  EXPECT_EQ(q.leaf_edges[3].direction, Direction::LeafToCenter);
  EXPECT_EQ(q.leaf_edges[3].relationship.descriptor->relations, RelationSet{R::Behind});
}

TEST(ParseQuery, UserRelationTokenIsAbstract) {
  const QueryGraph q = parse(fixture_text("coffee_cup_mary.txt"));
  EXPECT_EQ(q.center.name, "coffee cup");
  ASSERT_EQ(q.leaves.size(), 2u);
  EXPECT_EQ(q.leaves[0].name, "mary");
  EXPECT_EQ(q.leaf_edges[0].relationship.kind, RelationKind::Abstract);
  EXPECT_EQ(q.leaves[1].kind, NodeKind::Region);
  EXPECT_EQ(q.leaf_edges[1].relationship.descriptor->relations, RelationSet{R::In});
}

TEST(ParseQuery, MislabeledSpatialLikeFailsWithLine) {
  try {
    parse(fixture_text("favorite_drink.txt"));
    FAIL() << "expected UnknownSpatialRelation";
  } catch (const UnknownSpatialRelation& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("line 9"), std::string::npos) << msg;
    EXPECT_NE(msg.find("'like'"), std::string::npos) << msg;
  }
}

TEST(ParseQuery, TargetOnly) {
  const QueryGraph q = parse("target @ cup {object}");
  EXPECT_EQ(q.leaves.size(), 0u);
  EXPECT_EQ(q.node_count(), 1u);
  EXPECT_EQ(q.edge_count(), 0u);
}

TEST(ParseQuery, AgentTokenAndCaseFolding) {
  const QueryGraph q = parse("\n  TARGET @ Coffee   Cup {Object}\n\nTom {agent} -- Owns [abstract] -- coffee cup {object}\n");
  EXPECT_EQ(q.center.name, "coffee cup");
  ASSERT_EQ(q.leaves.size(), 1u);
  EXPECT_EQ(q.leaves[0].name, "tom");
  EXPECT_EQ(q.leaves[0].kind, NodeKind::Agent);
  EXPECT_EQ(q.leaf_edges[0].relationship.label, "owns");
}

TEST(ParseQuery, Errors) {
  const auto line_of = [](const std::string& text) -> std::size_t {
    try {
      parse(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_THROW(parse("cup {object} -- near [spatial] -- table {object}"), ParseError);
  EXPECT_EQ(line_of("target @ cup {object}\ntarget @ plate {object}"), 2u);
  EXPECT_EQ(line_of("target @ cup {thing}"), 1u);
  EXPECT_EQ(line_of("target @ cup {object}\ncup {object} -- near [temporal] -- table {object}"), 2u);
  EXPECT_EQ(line_of("target @ cup {object}\nthis is prose"), 2u);
  EXPECT_EQ(line_of("target @ cup {object}\ncup {object} -- near [spatial] -- cup {object}"), 2u);
  EXPECT_THROW(parse("target @ cup {object}\ncup {object} -- floating [spatial] -- t {object}"),
               UnknownSpatialRelation);
  EXPECT_THROW(parse(""), ParseError);
}

TEST(ParseQuery, SameNameDifferentKindsAreDistinct) {
  const QueryGraph q = parse("target @ kitchen {object}\nkitchen {region} -- near [spatial] -- kitchen {object}");
  ASSERT_EQ(q.leaves.size(), 1u);
  EXPECT_EQ(q.leaves[0].kind, NodeKind::Region);
}

TEST(ExtractStar, CrackerBoxDropsTableKitchen) {
  const QueryGraph q = parse(fixture_text("cracker_box.txt"));
  EXPECT_EQ(q.center.name, "cracker box");
  ASSERT_EQ(q.leaves.size(), 1u);
  EXPECT_EQ(q.leaves[0].name, "table");
  EXPECT_EQ(q.leaf_edges[0].relationship.descriptor->relations, RelationSet{R::Near});
  ASSERT_EQ(q.warnings.size(), 1u);
  EXPECT_NE(q.warnings[0].find("table {object} -- in [spatial] -- kitchen {region}"), std::string::npos);
}

TEST(ExtractStar, CountsIncidentAndDropped) {
  const QueryGraph q = parse(
      "target @ cup {object}\n"
      "cup {object} -- near [spatial] -- plate {object}\n"
      "tom {user} -- like [abstract] -- cup {object}\n"
      "plate {object} -- on [spatial] -- table {object}\n"
      "cup {object} -- in [spatial] -- kitchen {region}\n"
      "tom {user} -- own [abstract] -- plate {object}\n");
  EXPECT_EQ(q.leaves.size(), 3u);
  EXPECT_EQ(q.warnings.size(), 2u);
}

TEST(ExtractStar, RepeatedPairMergesIntoOneLeaf) {
  const QueryGraph q = parse(
      "target @ cup {object}\n"
      "cup {object} -- near [spatial] -- plate {object}\n"
      "plate {object} -- behind [spatial] -- cup {object}\n");
  EXPECT_EQ(q.leaves.size(), 1u);
  EXPECT_EQ(q.leaf_edges.size(), 2u);
  EXPECT_EQ(q.leaf_edges[1].direction, Direction::LeafToCenter);
}

TEST(ExtractStar, StarInputIsIdentity) {
  const ParsedQuery p = parse_query_structure(fixture_text("coffee_cup_zoro.txt"), stub_context());
  const QueryGraph q = extract_star(p);
  EXPECT_EQ(q.leaf_edges.size(), p.relations.size());
  EXPECT_TRUE(q.warnings.empty());
}

TEST(ToDsl, RoundTripIsStructurallyIdentical) {
  for (const char* name : {"coffee_cup_zoro.txt", "coffee_cup_mary.txt", "cracker_box.txt"}) {
    const QueryGraph q = parse(fixture_text(name));
    const QueryGraph back = parse(to_dsl(q));
    EXPECT_TRUE(structurally_equal(q, back)) << name << "\n" << to_dsl(q);
  }
  const QueryGraph q = parse("target @ cup {object}\nplate {object} -- at the left front part [spatial] -- cup {object}");
  EXPECT_TRUE(structurally_equal(q, parse(to_dsl(q))));
}

TEST(ParseQuery, NeedsContext) {
  EXPECT_THROW(parse_query("target @ cup {object}", QueryContext{}), ConfigError);
}
