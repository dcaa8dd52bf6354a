#include <string>

#include "doctest.h"
#include "trend/common.hpp"
#include "trend/ontology.hpp"

using namespace trend;
using evaluation::RelationOntology;

namespace {

// The 13-class target label set with its 6- and 4-class regroupings and the
// cross-dataset mapping that induces the seen/unseen partition.
const char* kTargetOntology = R"JSON({
  "labels": [
    "Child-Parent", "Child-Other Family Elder", "Siblings", "Spouse",
    "Lovers", "Courtship", "Friends", "Neighbors", "Roommates",
    "Workplace Superior-Subordinate", "Colleague/Partners", "Opponents",
    "Professional Contact"
  ],
  "coarse": {
    "6": {
      "Child-Parent": "Family Elder-Junior",
      "Child-Other Family Elder": "Family Elder-Junior",
      "Siblings": "Family Peer",
      "Spouse": "Family Peer",
      "Lovers": "Intimacy",
      "Courtship": "Intimacy",
      "Friends": "Others",
      "Neighbors": "Others",
      "Roommates": "Others",
      "Workplace Superior-Subordinate": "Official Superior-Subordinate",
      "Colleague/Partners": "Official Peer",
      "Opponents": "Others",
      "Professional Contact": "Official Peer"
    },
    "4": {
      "Child-Parent": "Family",
      "Child-Other Family Elder": "Family",
      "Siblings": "Family",
      "Spouse": "Family",
      "Lovers": "Intimacy",
      "Courtship": "Intimacy",
      "Friends": "Others",
      "Neighbors": "Others",
      "Roommates": "Others",
      "Workplace Superior-Subordinate": "Official",
      "Colleague/Partners": "Official",
      "Opponents": "Others",
      "Professional Contact": "Official"
    }
  },
  "cross_map": {
    "Child-Parent": "per:children",
    "Child-Other Family Elder": "per:other_family",
    "Siblings": "per:siblings",
    "Spouse": "per:spouse",
    "Lovers": "per:girl/boyfriend",
    "Courtship": null,
    "Friends": "per:friends",
    "Neighbors": "per:neighbor",
    "Roommates": "per:roommate",
    "Workplace Superior-Subordinate": ["per:boss", "per:subordinate"],
    "Colleague/Partners": "per:works",
    "Opponents": null,
    "Professional Contact": null
  }
})JSON";

}  // namespace

TEST_CASE("plain label list has identity coarse and no partition") {
  RelationOntology o = RelationOntology::from_labels({"a", "b", "c"});
  CHECK(o.size() == 3);
  CHECK(o.id_of("b") == 1);
  CHECK(o.id_of("missing") == -1);
  CHECK(o.has_coarse(3));
  CHECK_FALSE(o.has_coarse(2));
  CHECK(o.coarse_of(3, 2) == "c");
  CHECK_FALSE(o.has_partition());
  CHECK(o.cross_sources(0).empty());
  CHECK_THROWS_AS(o.coarse_of(2, 0), InputError);
}

TEST_CASE("target ontology loads with groupings and partition") {
  RelationOntology o = RelationOntology::load_json(kTargetOntology);
  REQUIRE(o.size() == 13);
  CHECK(o.label(0) == "Child-Parent");
  CHECK(o.id_of("Professional Contact") == 12);
  CHECK(o.has_coarse(13));
  CHECK(o.has_coarse(6));
  CHECK(o.has_coarse(4));

  CHECK(o.coarse_of(13, o.id_of("Siblings")) == "Siblings");
  CHECK(o.coarse_of(6, o.id_of("Siblings")) == "Family Peer");
  CHECK(o.coarse_of(4, o.id_of("Siblings")) == "Family");
  CHECK(o.coarse_of(6, o.id_of("Opponents")) == "Others");
  CHECK(o.coarse_of(4, o.id_of("Workplace Superior-Subordinate")) == "Official");

  REQUIRE(o.has_partition());
  CHECK(o.is_seen(o.id_of("Siblings")));
  CHECK(o.is_seen(o.id_of("Lovers")));
  CHECK_FALSE(o.is_seen(o.id_of("Courtship")));
  CHECK_FALSE(o.is_seen(o.id_of("Opponents")));
  CHECK_FALSE(o.is_seen(o.id_of("Professional Contact")));

  const auto& wss = o.cross_sources(o.id_of("Workplace Superior-Subordinate"));
  REQUIRE(wss.size() == 2);
  CHECK(wss[0] == "per:boss");
  CHECK(wss[1] == "per:subordinate");
  CHECK(o.cross_sources(o.id_of("Siblings")) ==
        std::vector<std::string>{"per:siblings"});

  int seen = 0;
  for (int i = 0; i < o.size(); ++i) seen += o.is_seen(i) ? 1 : 0;
  CHECK(seen == 10);
}

TEST_CASE("ontology JSON round-trips through its canonical form") {
  RelationOntology o = RelationOntology::load_json(kTargetOntology);
  std::string canon = o.to_json();
  RelationOntology back = RelationOntology::load_json(canon);
  CHECK(back.to_json() == canon);
  CHECK(back.fingerprint() == o.fingerprint());
  CHECK(back.size() == o.size());
  for (int i = 0; i < o.size(); ++i) {
    CHECK(back.label(i) == o.label(i));
    CHECK(back.is_seen(i) == o.is_seen(i));
    CHECK(back.coarse_of(6, i) == o.coarse_of(6, i));
  }
}

TEST_CASE("fingerprint tracks content") {
  RelationOntology a = RelationOntology::from_labels({"x", "y"});
  RelationOntology b = RelationOntology::from_labels({"x", "z"});
  RelationOntology c = RelationOntology::from_labels({"x", "y"});
  CHECK(a.fingerprint() == c.fingerprint());
  CHECK(a.fingerprint() != b.fingerprint());
}

TEST_CASE("validation rejects malformed ontologies") {
  CHECK_THROWS_AS(RelationOntology::from_labels({}), InputError);
  CHECK_THROWS_AS(RelationOntology::from_labels({"a", "a"}), InputError);
  CHECK_THROWS_AS(RelationOntology::load_json("not json"), InputError);
  CHECK_THROWS_AS(RelationOntology::load_json("{\"labels\": 3}"), InputError);

  // class count disagrees with the granularity key
  CHECK_THROWS_AS(RelationOntology::load_json(R"({
    "labels": ["a", "b", "c"],
    "coarse": {"2": {"a": "x", "b": "x", "c": "x"}}
  })"),
                  InputError);

  // label missing from a grouping
  CHECK_THROWS_AS(RelationOntology::load_json(R"({
    "labels": ["a", "b"],
    "coarse": {"2": {"a": "x"}}
  })"),
                  InputError);

  // groupings fail to nest: a,b share a fine class but not a coarse one
  CHECK_THROWS_AS(RelationOntology::load_json(R"({
    "labels": ["a", "b", "c", "d"],
    "coarse": {
      "3": {"a": "f1", "b": "f1", "c": "f2", "d": "f3"},
      "2": {"a": "c1", "b": "c2", "c": "c2", "d": "c2"}
    }
  })"),
                  InputError);

  // cross_map naming an unknown label
  CHECK_THROWS_AS(RelationOntology::load_json(R"({
    "labels": ["a"],
    "cross_map": {"zz": "per:friends"}
  })"),
                  InputError);
}

TEST_CASE("nested groupings are accepted") {
  RelationOntology o = RelationOntology::load_json(R"({
    "labels": ["a", "b", "c", "d"],
    "coarse": {
      "3": {"a": "f1", "b": "f1", "c": "f2", "d": "f3"},
      "2": {"a": "c1", "b": "c1", "c": "c2", "d": "c2"}
    }
  })");
  CHECK(o.coarse_of(3, 0) == "f1");
  CHECK(o.coarse_of(2, 3) == "c2");
}
