#include <doctest.h>

#include <algorithm>
#include <set>

#include "grouprec/dataset.hpp"
#include "grouprec/synthetic.hpp"
#include "testutil.hpp"

using namespace grouprec;

TEST_CASE("interactions parse with dense first-appearance ids") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/t.txt", "7 3\n7 9\n2 3\n");
  IdRegistry users, items;
  const auto m = load_interactions(dir + "/t.txt", users, items);
  CHECK(m.n_rows == 2);
  CHECK(m.n_cols == 2);
  const std::vector<std::pair<int, int>> want = {{0, 0}, {0, 1}, {1, 0}};
  CHECK(m.pairs == want);
  CHECK(users.raw(0) == 7);
  CHECK(users.raw(1) == 2);
  CHECK(items.raw(1) == 9);
}

TEST_CASE("interactions: empty file and duplicates") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/empty.txt", "");
  IdRegistry u1, i1;
  const auto empty = load_interactions(dir + "/empty.txt", u1, i1);
  CHECK(empty.n_rows == 0);
  CHECK(empty.pairs.empty());

  testutil::write_file(dir + "/dup.txt", "7 3\n7 3\n");
  IdRegistry u2, i2;
  std::vector<std::string> warnings;
  const auto dup = load_interactions(dir + "/dup.txt", u2, i2, &warnings);
  CHECK(dup.pairs.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("1 duplicate") != std::string::npos);
}

TEST_CASE("interactions: malformed line reports its number") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/bad.txt", "1 2\nnope x\n");
  IdRegistry u, i;
  CHECK_THROWS_WITH_AS(load_interactions(dir + "/bad.txt", u, i),
                       doctest::Contains(":2:"), UserError);
  CHECK_THROWS_AS(load_interactions(dir + "/missing.txt", u, i), UserError);
}

TEST_CASE("eval negatives parse") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/neg.txt", "(5,9) 1 2 3\n");
  IdRegistry subjects, items;
  const auto set = load_eval_negatives(dir + "/neg.txt", subjects, items, SubjectKind::User);
  REQUIRE(set.cases.size() == 1);
  const auto& c = set.cases[0];
  CHECK(c.subject == subjects.lookup(5).value());
  CHECK(c.positive == items.lookup(9).value());
  CHECK(c.negatives.size() == 3);

  testutil::write_file(dir + "/bad.txt", "5,9 1 2\n");
  IdRegistry s2, i2;
  CHECK_THROWS_WITH_AS(load_eval_negatives(dir + "/bad.txt", s2, i2, SubjectKind::User),
                       doctest::Contains(":1:"), UserError);

  testutil::write_file(dir + "/nonegs.txt", "(5,9)\n");
  IdRegistry s3, i3;
  CHECK_THROWS_AS(load_eval_negatives(dir + "/nonegs.txt", s3, i3, SubjectKind::User), UserError);
}

TEST_CASE("eval negatives: 100-negative line") {
  const auto dir = testutil::scratch_dir("data");
  std::string line = "(1,2)";
  for (int i = 0; i < 100; ++i) line += " " + std::to_string(100 + i);
  testutil::write_file(dir + "/neg.txt", line + "\n");
  IdRegistry s, i;
  const auto set = load_eval_negatives(dir + "/neg.txt", s, i, SubjectKind::User);
  CHECK(set.cases.at(0).negatives.size() == 100);
}

TEST_CASE("group members parse, dedupe, and errors") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/gm.txt", "10 4,7\n11 5\n");
  IdRegistry groups, users;
  const auto gm = load_group_members(dir + "/gm.txt", groups, users);
  CHECK(gm.n_groups == 2);
  CHECK(gm.members[0].size() == 2);

  testutil::write_file(dir + "/dup.txt", "10 4,4\n");
  IdRegistry g2, u2;
  std::vector<std::string> warnings;
  const auto dup = load_group_members(dir + "/dup.txt", g2, u2, &warnings);
  CHECK(dup.members[0].size() == 1);
  CHECK(warnings.size() == 1);

  testutil::write_file(dir + "/empty.txt", "10 \n");
  IdRegistry g3, u3;
  CHECK_THROWS_AS(load_group_members(dir + "/empty.txt", g3, u3), UserError);
}

TEST_CASE("line-format round trip preserves the pair set") {
  const auto dir = testutil::scratch_dir("data");
  Rng rng(7);
  const auto m = make_random_interactions(20, 15, 5, rng);
  // Shifted raw ids so the round trip exercises the remapping.
  IdRegistry subjects, items;
  for (int u = 0; u < 20; ++u) subjects.intern(u * 3 + 100);
  for (int t = 0; t < 15; ++t) items.intern(t * 2 + 55);
  write_interactions(dir + "/out.txt", m, subjects, items);
  IdRegistry s2, i2;
  const auto back = load_interactions(dir + "/out.txt", s2, i2);
  REQUIRE(back.pairs.size() == m.pairs.size());
  // Raw pairs must match exactly.
  std::set<std::pair<std::int64_t, std::int64_t>> raw_a, raw_b;
  for (const auto& [u, t] : m.pairs) raw_a.insert({subjects.raw(u), items.raw(t)});
  for (const auto& [u, t] : back.pairs) raw_b.insert({s2.raw(u), i2.raw(t)});
  CHECK(raw_a == raw_b);
}

TEST_CASE("registry is a bijection and loading is deterministic") {
  const auto dir = testutil::scratch_dir("data");
  testutil::write_file(dir + "/t.txt", "9 1\n4 1\n9 2\n8 5\n");
  IdRegistry ua, ia;
  const auto a = load_interactions(dir + "/t.txt", ua, ia);
  IdRegistry ub, ib;
  const auto b = load_interactions(dir + "/t.txt", ub, ib);
  CHECK(a.pairs == b.pairs);
  for (int u = 0; u < ua.size(); ++u) CHECK(ua.lookup(ua.raw(u)).value() == u);
}

TEST_CASE("validator flags range violations and cold users") {
  Dataset ds;
  ds.n_users = 2;
  ds.n_items = 2;
  ds.train.n_rows = 2;
  ds.train.n_cols = 2;
  ds.train.pairs = {{0, 0}};
  ds.train.row_index = {{0}, {}};
  ds.user_eval.subject_kind = SubjectKind::User;
  ds.user_eval.cases.push_back({0, 1, {0}});

  SUBCASE("consistent toy dataset has no errors") {
    const auto rep = validate_dataset(ds);
    CHECK(rep.ok());
    CHECK(rep.group_train_excluded_from_training);
    // user 1 has no training pairs
    REQUIRE(!rep.warnings.empty());
    CHECK(rep.warnings[0].find("no training interaction") != std::string::npos);
  }
  SUBCASE("eval item out of range is a hard error") {
    ds.user_eval.cases.push_back({0, 5, {0}});
    const auto rep = validate_dataset(ds);
    CHECK(!rep.ok());
  }
  SUBCASE("positive listed among negatives is an error") {
    ds.user_eval.cases.push_back({0, 1, {1}});
    CHECK(!validate_dataset(ds).ok());
  }
}

TEST_CASE("full benchmark layout loads consistently") {
  const auto dir = testutil::scratch_dir("bench");
  BenchmarkSpec spec;
  spec.n_users = 60;
  spec.latent_clusters = 4;
  spec.pool_per_cluster = 12;
  spec.shared_items = 20;
  spec.train_per_user = 6;
  spec.group_size = 5;
  spec.negatives_per_case = 20;
  const auto paths = make_benchmark_files(dir, spec, 11);
  const auto ds = load_dataset(paths);
  CHECK(ds.n_users == 60);
  CHECK(ds.n_items <= 4 * 12 + 20);
  CHECK(ds.has_group_side);
  CHECK(ds.user_eval.cases.size() == 60);
  CHECK(ds.group_eval.cases.size() == 12);
  const auto rep = validate_dataset(ds);
  CHECK(rep.ok());

  // Group-side files load after the user side, so dropping the group-side
  // training inputs does not move any model index.
  DatasetPaths reduced = paths;
  reduced.group_train.clear();
  reduced.group_members.clear();
  const auto ds2 = load_dataset(reduced);
  CHECK(ds2.n_users == ds.n_users);
  CHECK(ds2.n_items == ds.n_items);
  CHECK(ds2.train.pairs == ds.train.pairs);
  CHECK_FALSE(ds2.has_group_side);
}
