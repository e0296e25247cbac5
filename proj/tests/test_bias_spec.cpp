#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <fstream>
#include <map>
#include <sstream>

#include "debias/bias_spec.hpp"

using debias::BiasDefinition;
using debias::BiasKind;
using debias::BiasPair;
using debias::load_bias_definition;
using debias::load_group_manifest;

namespace {

BiasDefinition parse(const std::string& text, const std::string& kind = "gender") {
  std::istringstream in(text);
  return load_bias_definition(BiasKind(kind), in);
}

}  // namespace

TEST_CASE("a plain line yields one pair") {
  const auto def = parse("woman\tman\n");
  REQUIRE(def.size() == 1);
  CHECK(def.pairs()[0] == BiasPair{"woman", "man"});
}

TEST_CASE("alternatives expand into the cross-product") {
  const auto def = parse("husband|wife\tspouse\n", "lgbtq");
  REQUIRE(def.size() == 2);
  CHECK(def.pairs()[0] == BiasPair{"husband", "spouse"});
  CHECK(def.pairs()[1] == BiasPair{"wife", "spouse"});

  const auto both = parse("a|b\tc|d\n", "x");
  REQUIRE(both.size() == 4);
  CHECK(both.pairs()[0] == BiasPair{"a", "c"});
  CHECK(both.pairs()[1] == BiasPair{"a", "d"});
  CHECK(both.pairs()[2] == BiasPair{"b", "c"});
  CHECK(both.pairs()[3] == BiasPair{"b", "d"});
}

TEST_CASE("comments-only input is an empty-definition error") {
  CHECK_THROWS_AS(parse("# nothing here\n# still nothing\n"), debias::EmptyInputError);
  CHECK_THROWS_AS(parse(""), debias::EmptyInputError);
}

TEST_CASE("wrong field count reports the line") {
  CHECK_THROWS_WITH_AS(parse("woman\tman\nlonely\n"), doctest::Contains("line 2"),
                       debias::ParseError);
  CHECK_THROWS_AS(parse("a\tb\tc\n"), debias::ParseError);
}

TEST_CASE("expansion never yields equal-sided or duplicate pairs") {
  const auto def = parse("x|y\tx\n");
  REQUIRE(def.size() == 1);
  CHECK(def.pairs()[0] == BiasPair{"y", "x"});

  const auto dedup = parse("a|a\tb\na\tb\n");
  CHECK(dedup.size() == 1);
}

TEST_CASE("multi-word phrases survive verbatim") {
  const auto def = parse("easy task\tcake walk\n", "race");
  REQUIRE(def.size() == 1);
  CHECK(def.pairs()[0].left == "easy task");
  CHECK(def.pairs()[0].right == "cake walk");
}

TEST_CASE("parsing preserves file order") {
  const auto def = parse("b\tc\na\td\n");
  CHECK(def.pairs()[0].left == "b");
  CHECK(def.pairs()[1].left == "a");
}

TEST_CASE("definition invariants are enforced at construction") {
  CHECK_THROWS_AS(BiasDefinition(BiasKind("x"), {}), debias::EmptyInputError);
  CHECK_THROWS_AS(BiasDefinition(BiasKind("x"), {{"a", "a"}}), debias::ConfigError);
  CHECK_THROWS_AS(BiasDefinition(BiasKind("x"), {{"a", "b"}, {"a", "b"}}),
                  debias::ConfigError);
  CHECK_THROWS_AS(BiasKind(""), debias::ConfigError);
}

TEST_CASE("shipped definition files transcribe the published pair table") {
  const std::map<std::string, std::size_t> expected_pairs{
      {"gender", 7}, {"race", 4}, {"age", 4}, {"religion", 4}, {"lgbtq", 7}};
  for (const auto& [kind, count] : expected_pairs) {
    std::ifstream in(std::string(DEBIASKIT_SPECS_DIR) + "/" + kind + ".tsv");
    REQUIRE(in);
    const auto def = load_bias_definition(BiasKind(kind), in);
    CHECK_MESSAGE(def.size() == count, kind);
  }

  std::ifstream gender(std::string(DEBIASKIT_SPECS_DIR) + "/gender.tsv");
  const auto def = load_bias_definition(BiasKind("gender"), gender);
  CHECK(def.pairs()[0] == BiasPair{"woman", "man"});
  CHECK(def.pairs()[2] == BiasPair{"she", "he"});
}

TEST_CASE("group manifest parses label/path lines") {
  std::istringstream in("# groups\nfemale\tf.txt\nmale\tm.txt\n");
  const auto groups = load_group_manifest(in);
  REQUIRE(groups.size() == 2);
  CHECK(groups[0].label == "female");
  CHECK(groups[1].path == "m.txt");
}

TEST_CASE("group manifest rejects bad lines") {
  std::istringstream short_line("female\n");
  CHECK_THROWS_AS(load_group_manifest(short_line), debias::ParseError);
  std::istringstream dup("a\tx\na\ty\n");
  CHECK_THROWS_AS(load_group_manifest(dup), debias::ParseError);
  std::istringstream empty("# none\n");
  CHECK_THROWS_AS(load_group_manifest(empty), debias::EmptyInputError);
}
