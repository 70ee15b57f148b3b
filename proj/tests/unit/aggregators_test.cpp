#include <map>

#include "doctest.h"
#include "semvote/aggregators.hpp"
#include "semvote/selection.hpp"
#include "test_support.hpp"

using namespace semvote;
using namespace semvote::testing;

namespace {

// O(n^2 D) agreement count straight from the records.
std::vector<std::int64_t> brute_mbr(const std::vector<ScoredCandidate>& pool) {
  std::vector<std::int64_t> s(pool.size(), 0);
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t k = 0; k < pool.size(); ++k)
      if (i != k)
        for (std::size_t j = 0; j < pool[i].fingerprint.size(); ++j)
          s[i] += pool[i].fingerprint.entries[j].status == pool[k].fingerprint.entries[j].status &&
                  pool[i].fingerprint.entries[j].payload == pool[k].fingerprint.entries[j].payload;
  return s;
}

}  // namespace

TEST_CASE("majority vote on a unanimous pool returns the shortest candidate") {
  std::vector<ScoredCandidate> pool;
  for (int i = 0; i < 5; ++i) pool.push_back(scored(i, std::string(10 - i, 'x'), {ok("1"), ok("2")}));
  auto r = select_majority_vote(pool);
  CHECK(r.selected == 4);
}

TEST_CASE("majority vote discards erroring candidates before grouping") {
  std::vector<ScoredCandidate> pool = {
      scored(0, "e0", {ok("1"), err("ValueError")}), scored(1, "e1", {err("ValueError"), ok("1")}),
      scored(2, "pair_long", {ok("1"), ok("2")}),     scored(3, "pair", {ok("1"), ok("2")}),
      scored(4, "lone", {ok("1"), ok("3")})};
  // Survivors 2,3,4 split {2,3} / {4}; the pair wins and its shorter member is 3.
  auto r = select_majority_vote(pool);
  CHECK(r.selected == 3);
  CHECK(r.cluster_count == 2);
  CHECK(r.largest_cluster == 2);
}

TEST_CASE("majority vote abstains when every candidate errs somewhere") {
  std::vector<ScoredCandidate> pool = {scored(0, "a", {ok("1"), err("IndexError")}),
                                       scored(1, "b", {ExecRecord::timeout(), ok("1")})};
  CHECK(select_majority_vote(pool).abstained());
}

TEST_CASE("output-pattern key keeps a separator between payloads") {
  CHECK(output_pattern_key(fp({ok("ab"), ok("c")})) != output_pattern_key(fp({ok("a"), ok("bc")})));
}

TEST_CASE("ast majority groups by canonical key and skips unparseable candidates") {
  std::vector<Candidate> pool = {cand(0, "def f(a):\n    return a+1\n"), cand(1, "def f(x):\n    return x+1\n"),
                                 cand(2, "def f(x):\n    return sum([x, 1])\n"), cand(3, "def f(:\n")};
  std::vector<std::optional<std::string>> keys = {"k1", "k1", "k2", std::nullopt};
  auto r = select_ast_majority(pool, keys);
  CHECK(r.selected == 0);
  CHECK(r.cluster_count == 2);

  std::vector<Candidate> single = {cand(7, "def f(x):\n    return x\n")};
  std::vector<std::optional<std::string>> one = {"k"};
  CHECK(select_ast_majority(single, one).selected == 7);

  std::vector<std::optional<std::string>> none = {std::nullopt};
  CHECK(select_ast_majority(single, none).abstained());
}

TEST_CASE("weighted vote weight is the success rate") {
  std::vector<ExecRecord> recs(50, ok("1"));
  for (int j = 0; j < 5; ++j) recs[static_cast<std::size_t>(j)] = err("ValueError");
  CHECK(success_rate(fp(recs)) == doctest::Approx(0.9));
}

TEST_CASE("weighted vote: {A} at 1.0 beats {B,C} at 0.4 + 0.4") {
  // D = 5: A all ok; B and C share a fingerprint with 2 of 5 ok.
  std::vector<ExecRecord> a = {ok("1"), ok("2"), ok("3"), ok("4"), ok("5")};
  std::vector<ExecRecord> bc = {ok("1"), ok("2"), err("E"), err("E"), err("E")};
  std::vector<ScoredCandidate> pool = {scored(0, "aaaaaaaa", a), scored(1, "b", bc), scored(2, "c", bc)};
  auto r = select_weighted_vote(pool);

  // Oracle: enumerate groups and their summed weights.
  std::map<std::vector<ExecRecord>, double> score;
  for (const auto& sc : pool) score[sc.fingerprint.entries] += success_rate(sc.fingerprint);
  CHECK(score[a] == doctest::Approx(1.0));
  CHECK(score[bc] == doctest::Approx(0.8));
  CHECK(r.selected == 0);

  // With errored candidates dropped only A votes.
  CHECK(select_weighted_vote(pool, WvGrouping::kAllSuccessOnly).selected == 0);
}

TEST_CASE("weighted vote and majority agree on an all-success unanimous pool") {
  std::vector<ScoredCandidate> pool;
  for (int i = 0; i < 4; ++i) pool.push_back(scored(i, std::string(static_cast<std::size_t>(i + 3), 'y'), {ok("9")}));
  CHECK(select_weighted_vote(pool).selected == select_majority_vote(pool).selected);
}

TEST_CASE("mbr scores: A,B agree everywhere, C nowhere") {
  std::vector<ScoredCandidate> pool = {scored(0, "longer_a", {ok("1"), ok("2")}), scored(1, "b", {ok("1"), ok("2")}),
                                       scored(2, "c", {ok("5"), ok("6")})};
  CHECK(mbr_scores(pool) == std::vector<std::int64_t>{2, 2, 0});
  CHECK(mbr_scores(pool) == brute_mbr(pool));
  CHECK(select_mbr_exec(pool).selected == 1);
}

TEST_CASE("mbr on a singleton pool selects it with score 0") {
  std::vector<ScoredCandidate> pool = {scored(3, "only", {ok("1")})};
  auto r = select_mbr_exec(pool);
  CHECK(r.selected == 3);
  REQUIRE(r.scores.size() == 1);
  CHECK(r.scores[0].score == 0.0);
}

TEST_CASE("mbr counts agreement on exception types") {
  std::vector<ScoredCandidate> pool = {scored(0, "a", {err("ValueError"), ok("1")}),
                                       scored(1, "b", {err("ValueError"), ok("2")})};
  CHECK(mbr_scores(pool) == std::vector<std::int64_t>{1, 1});
  std::vector<ScoredCandidate> empty;
  CHECK(select_mbr_exec(empty).abstained());
}

TEST_CASE("best-of-n returns the first valid candidate") {
  auto invalid = cand(0, "def f(:");
  invalid.is_syntactically_valid = false;
  std::vector<Candidate> pool = {invalid, cand(1, "v1"), cand(2, "v2")};
  CHECK(select_best_of_n(pool).selected == 1);
  std::vector<Candidate> valid = {cand(0, "a"), cand(1, "b")};
  CHECK(select_best_of_n(valid).selected == 0);
  std::vector<Candidate> bad = {invalid};
  CHECK(select_best_of_n(bad).abstained());
}

TEST_CASE("greedy passes through a valid sample and abstains otherwise") {
  CHECK(select_greedy(cand(-1, "def f():\n    return 1\n")).selected == -1);
  auto broken = cand(-1, "def f(:");
  broken.is_syntactically_valid = false;
  CHECK(select_greedy(broken).abstained());
  CHECK(select_greedy(std::nullopt).abstained());
}

TEST_CASE("property: mbr matches brute force and invariants hold") {
  PoolGen gen(21);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t d = gen.uniform(1, 4);
    auto pool = gen.pool(gen.uniform(1, 6), d, false);
    auto scores = mbr_scores(pool);
    CHECK(scores == brute_mbr(pool));
    std::int64_t total = 0;
    for (auto s : scores) total += s;
    CHECK(total % 2 == 0);
  }
  std::vector<ScoredCandidate> unanimous;
  for (int i = 0; i < 6; ++i) unanimous.push_back(scored(i, "s" + std::to_string(i), {ok("1"), err("E"), ok("x")}));
  for (auto s : mbr_scores(unanimous)) CHECK(s == 5 * 3);
}

TEST_CASE("property: all-success pools make MV, WV and SemanticVote coincide") {
  PoolGen gen(23);
  for (int trial = 0; trial < 300; ++trial) {
    auto pool = gen.pool(gen.uniform(1, 10), gen.uniform(1, 5), true);
    auto sv = run_semanticvote(pool).selected;
    CHECK(select_majority_vote(pool).selected == sv);
    CHECK(select_weighted_vote(pool).selected == sv);
  }
}

TEST_CASE("property: MV abstains iff no all-success fingerprint") {
  PoolGen gen(29);
  for (int trial = 0; trial < 300; ++trial) {
    auto pool = gen.pool(gen.uniform(1, 8), gen.uniform(1, 4), false);
    bool any_ok = std::any_of(pool.begin(), pool.end(), [](const auto& sc) { return sc.fingerprint.all_success; });
    CHECK(select_majority_vote(pool).abstained() == !any_ok);
  }
}

TEST_CASE("property: aggregators are invariant under pool reordering") {
  PoolGen gen(31);
  for (int trial = 0; trial < 200; ++trial) {
    auto pool = gen.pool(gen.uniform(1, 10), gen.uniform(1, 4), false);
    auto shuffled = pool;
    std::shuffle(shuffled.begin(), shuffled.end(), gen.rng);
    auto same = [&](const SelectionResult& a, const SelectionResult& b) {
      if (a.abstained() || b.abstained()) return a.abstained() == b.abstained();
      return source_of(pool, *a.selected) == source_of(pool, *b.selected);
    };
    CHECK(same(select_majority_vote(pool), select_majority_vote(shuffled)));
    CHECK(same(select_weighted_vote(pool), select_weighted_vote(shuffled)));
    CHECK(same(select_mbr_exec(pool), select_mbr_exec(shuffled)));
  }
}
