#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "kog/runtime.hpp"
#include "oracles.hpp"
#include "util.hpp"

using namespace kog;

namespace {

bool usedRule(const std::map<Rule, uint64_t>& counts, Rule r) {
  auto it = counts.find(r);
  return it != counts.end() && it->second > 0;
}

std::vector<std::pair<Rule, uint64_t>> stepSketch(const RunResult& r) {
  std::vector<std::pair<Rule, uint64_t>> out;
  for (const auto& s : r.steps) out.push_back({s.rule, s.digestAfter});
  return out;
}

}  // namespace

TEST_CASE("default values: false for Bool, null for references") {
  Program p = testutil::parseSource("interface A { } { skip; }");
  CHECK(defaultValue(Type::boolean()) == Value::boolean(false));
  CHECK(defaultValue(Type::any()) == Value::null());
  CHECK(defaultValue(Type::iface("A")) == Value::null());
  CHECK(defaultValue(Type::group({"A"})) == Value::null());
}

TEST_CASE("initial configuration: one object running main at defaults") {
  Program p = testutil::parseSource(
      "interface A { } { Bool b; A x; Group<> g; b = true; }");
  Configuration cn = initialConfiguration(p);
  REQUIRE(cn.objects.size() == 1);
  CHECK(cn.groups.empty());
  CHECK(cn.nextObj == 2);
  CHECK(cn.nextGrp == 1);
  const ObjectState& o = cn.objects.at(1);
  REQUIRE(o.stack.size() == 1);
  CHECK(o.stack[0].method == "main");
  CHECK_FALSE(o.stack[0].returnVar.has_value());
  CHECK(o.stack[0].locals.at("b").val == Value::boolean(false));
  CHECK(o.stack[0].locals.at("x").val == Value::null());
  CHECK(o.stack[0].locals.at("g").val == Value::null());
}

TEST_CASE("ruleName covers all 19 rules with the documented spellings") {
  CHECK(std::string(ruleName(Rule::NewGroup)) == "New-Group");
  CHECK(std::string(ruleName(Rule::NewObject)) == "New-Object");
  CHECK(std::string(ruleName(Rule::Query2)) == "Query2");
  std::set<std::string> names;
  for (int i = 0; i < kRuleCount; ++i) names.insert(ruleName(static_cast<Rule>(i)));
  CHECK(names.size() == 19);
}

TEST_CASE("intf removes exactly the interfaces with a strict subtype present") {
  Program p = testutil::parseSource(
      "interface A { } interface B extends A { } interface C extends B { } { skip; }");
  auto o2 = Value::obj(2);
  auto o3 = Value::obj(3);
  CHECK(intf(p, {}) == std::set<std::string>{});
  CHECK(intf(p, {{o2, "A"}}) == std::set<std::string>{"A"});
  CHECK(intf(p, {{o2, "A"}, {o3, "B"}}) == std::set<std::string>{"B"});
  CHECK(intf(p, {{o2, "A"}, {o2, "C"}, {o3, "B"}}) == std::set<std::string>{"C"});
  // unrelated interfaces both survive; Any is shadowed by anything below it
  Program q = testutil::parseSource("interface A { } interface B { } { skip; }");
  CHECK(intf(q, {{o2, "A"}, {o3, "B"}}) == std::set<std::string>({"A", "B"}));
  CHECK(intf(q, {{o2, "A"}, {o3, "Any"}}) == std::set<std::string>{"A"});
}

TEST_CASE("intf agrees with the brute-force oracle on 1000 random export sets") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 1000; ++trial) {
    Program p = oracles::randomHierarchy(rng, 5);
    auto exports = oracles::randomExports(rng, 5, 6);
    CHECK(intf(p, exports) == oracles::intfOracle(p, exports));
  }
}

TEST_CASE("bind: matching methods activate, mismatches become error processes") {
  Program p = testutil::parseSource(
      "interface A { } class C() implements A { Bool m(Bool x) { Bool y; return x; } }"
      "{ skip; }");
  Process ok = bind(p, "m", "C", {Value::boolean(true)});
  CHECK_FALSE(ok.isError);
  CHECK(ok.locals.at("x").val == Value::boolean(true));
  CHECK(ok.locals.at("y").val == Value::boolean(false));
  REQUIRE(ok.returnVar.has_value());
  CHECK(*ok.returnVar == "x");

  CHECK(bind(p, "nope", "C", {}).isError);
  CHECK(bind(p, "m", "C", {}).isError);  // arity mismatch
}

TEST_CASE("groupcall: group-forwarded call and system-wide acquire terminate") {
  Program p = testutil::loadGood("groupcall.kog");
  RunResult r = run(p, {Policy::Random, 3, 10000});
  CHECK(r.outcome == Outcome::Terminated);
  CHECK(usedRule(r.ruleCounts, Rule::NewGroup));
  CHECK(usedRule(r.ruleCounts, Rule::Join));
  CHECK(usedRule(r.ruleCounts, Rule::Call3));
  CHECK(usedRule(r.ruleCounts, Rule::Call1));
  CHECK(usedRule(r.ruleCounts, Rule::Return1));
  CHECK(usedRule(r.ruleCounts, Rule::Acquire));
  // the exporter stays in the group
  REQUIRE(r.final_.groups.count(1));
  CHECK(r.final_.groups.at(1).exports ==
        std::set<ExportEntry>{{Value::obj(2), "Ping"}});
}

TEST_CASE("selfcall: loop unfolding and re-entrant self-calls") {
  Program p = testutil::loadGood("selfcall.kog");
  RunResult r = run(p, {Policy::Random, 0, 10000});
  CHECK(r.outcome == Outcome::Terminated);
  for (Rule rr : {Rule::While, Rule::Cond1, Rule::Cond2, Rule::Call1, Rule::Call2,
                  Rule::Return1, Rule::Return2, Rule::Assign1, Rule::Assign2, Rule::Skip,
                  Rule::NewObject}) {
    CAPTURE(ruleName(rr));
    CHECK(usedRule(r.ruleCounts, rr));
  }
  // While always unfolds into a conditional before the branch fires
  for (size_t i = 0; i + 1 < r.steps.size(); ++i)
    if (r.steps[i].rule == Rule::While)
      CHECK((r.steps[i + 1].rule == Rule::Cond1 || r.steps[i + 1].rule == Rule::Cond2));
}

TEST_CASE("leave2: a covered leave succeeds, an uncovered one is refused") {
  Program p = testutil::loadGood("leave2.kog");
  RunResult r = run(p, {Policy::Random, 5, 10000});
  CHECK(r.outcome == Outcome::Terminated);
  CHECK(usedRule(r.ruleCounts, Rule::Leave1));
  CHECK(usedRule(r.ruleCounts, Rule::Leave2));
  // the refused leave keeps the second exporter in place
  CHECK(r.final_.groups.at(1).exports ==
        std::set<ExportEntry>{{Value::obj(3), "Svc"}});
}

TEST_CASE("acquire respects the exclusion list") {
  Program p = testutil::parseSource(
      "interface P { Bool ping(Bool x); }"
      "class I1() implements P { Bool ping(Bool x) { return x; } }"
      "{ Group<> g; P a; P b; P c;"
      "  g = newgroup; a = new I1(); b = new I1();"
      "  a joins g as P; b joins g as P;"
      "  c = acquire P in g except a; }");
  std::vector<ExportEntry> chosen;
  explore(p, {500, 100000}, nullptr,
          [&](const Configuration&, const Transition& t, const Configuration&) {
            if (t.rule == Rule::Acquire) chosen.push_back(*t.choice);
          });
  REQUIRE(chosen.size() == 1);
  CHECK(chosen[0] == ExportEntry{Value::obj(3), "P"});
}

TEST_CASE("trace determinism: same program, policy, and seed give the same trace") {
  Program p = testutil::loadGood("editor.kog");
  RunResult a = run(p, {Policy::Random, 7, 100000});
  RunResult b = run(p, {Policy::Random, 7, 100000});
  CHECK(a.outcome == Outcome::Terminated);
  CHECK(stepSketch(a) == stepSketch(b));
  RunResult c = run(p, {Policy::RoundRobin, 0, 100000});
  RunResult d = run(p, {Policy::RoundRobin, 0, 100000});
  CHECK(c.outcome == Outcome::Terminated);
  CHECK(stepSketch(c) == stepSketch(d));
  // different seeds may diverge, but both must terminate
  RunResult e = run(p, {Policy::Random, 8, 100000});
  CHECK(e.outcome == Outcome::Terminated);
}

TEST_CASE("budget exhaustion reports budget, not stuck") {
  Program p = testutil::loadGood("editor.kog");
  RunResult r = run(p, {Policy::Random, 0, 3});
  CHECK(r.outcome == Outcome::Budget);
  CHECK(r.steps.size() == 3);
}

TEST_CASE("stuck: mutual synchronous calls are diagnosed as a wait cycle") {
  Program p = testutil::loadGood("stuck_mutual.kog");
  for (uint64_t seed : {0ull, 1ull, 2ull, 3ull}) {
    RunResult r = run(p, {Policy::Random, seed, 100000});
    CHECK(r.outcome == Outcome::Stuck);
    bool found = false;
    for (const auto& d : r.diagnosis)
      if (d.find("Call1 wait-cycle") != std::string::npos) found = true;
    CHECK(found);
  }
}

TEST_CASE("stuck: an unsatisfiable acquire is diagnosed as no-match") {
  Program p = testutil::loadGood("stuck_acquire.kog");
  RunResult r = run(p, {Policy::RoundRobin, 0, 100000});
  CHECK(r.outcome == Outcome::Stuck);
  bool found = false;
  for (const auto& d : r.diagnosis)
    if (d.find("Acquire no-match") != std::string::npos) found = true;
  CHECK(found);
}

TEST_CASE("error processes: missing method and null receiver") {
  // runs the raw engine without the static typecheck
  Program bad = testutil::parseSource(
      "interface I { } class C() implements I { }"
      "{ I x; Bool b; x = new C(); b = x.m(b); }");
  RunResult r = run(bad, {Policy::Random, 0, 1000});
  CHECK(r.outcome == Outcome::ErrorProcess);

  Program nullRecv = testutil::parseSource(
      "interface I { Bool m(Bool b); }"
      "{ I x; Bool b; b = x.m(b); }");
  RunResult r2 = run(nullRecv, {Policy::Random, 0, 1000});
  CHECK(r2.outcome == Outcome::ErrorProcess);
  REQUIRE_FALSE(r2.diagnosis.empty());
  CHECK(r2.diagnosis.front().find("null") != std::string::npos);
}

TEST_CASE("explore: visits every schedule and dedupes by digest") {
  Program p = testutil::loadGood("groupcall.kog");
  ExploreResult res = explore(p, {500, 100000});
  CHECK(res.states > 1);
  CHECK_FALSE(res.truncated);
  CHECK(res.terminalDigests.size() >= 1);
  CHECK(usedRule(res.ruleCounts, Rule::Call3));

  // a sequential program has a single terminal state, and the witness path
  // replayed from the initial configuration reaches it
  uint64_t term = res.terminalDigests.front();
  Configuration cn = initialConfiguration(p);
  for (const auto& t : res.pathTo(term)) cn = apply(p, cn, t);
  CHECK(digest(cn) == term);

  ExploreResult res2 = explore(p, {500, 100000});
  CHECK(res2.states == res.states);
  CHECK(res2.transitions == res.transitions);
}

TEST_CASE("explore: depth and state bounds truncate") {
  Program p = testutil::loadGood("editor.kog");
  ExploreResult shallow = explore(p, {5, 100000});
  CHECK(shallow.truncated);
  ExploreResult tiny = explore(p, {500, 10});
  CHECK(tiny.truncated);
  CHECK(tiny.states <= 10);
}

TEST_CASE("join monotonicity and leave discipline along explored edges") {
  Program p = testutil::loadGood("leave2.kog");
  bool ok = true;
  explore(p, {500, 100000}, nullptr,
          [&](const Configuration& before, const Transition& t, const Configuration& after) {
            for (const auto& [gid, gb] : before.groups) {
              const auto& ga = after.groups.at(gid);
              if (t.rule == Rule::Join && t.partnerGrp && *t.partnerGrp == gid) {
                // joins only gain entries
                ok = ok && std::includes(ga.exports.begin(), ga.exports.end(),
                                         gb.exports.begin(), gb.exports.end());
              } else if (t.rule == Rule::Leave1 && t.partnerGrp && *t.partnerGrp == gid) {
                ok = ok && intf(p, gb.exports) == intf(p, ga.exports);
                ok = ok && std::includes(gb.exports.begin(), gb.exports.end(),
                                         ga.exports.begin(), ga.exports.end());
              } else {
                ok = ok && gb.exports == ga.exports;
              }
            }
            return;
          });
  CHECK(ok);
}

TEST_CASE("digests distinguish successive states and are stable across calls") {
  Program p = testutil::loadGood("groupcall.kog");
  Configuration c0 = initialConfiguration(p);
  auto ts = enabled(p, c0);
  REQUIRE_FALSE(ts.empty());
  Configuration c1 = apply(p, c0, ts[0]);
  CHECK(digest(c0) != digest(c1));
  CHECK(digest(c0) == digest(initialConfiguration(p)));
}

TEST_CASE("describe renders rule, actor, and choice") {
  Transition t;
  t.rule = Rule::Acquire;
  t.object = 2;
  t.partnerGrp = 1;
  t.choice = ExportEntry{Value::obj(3), "P"};
  std::string s = describe(t);
  CHECK(s.find("Acquire") != std::string::npos);
  CHECK(s.find("o2") != std::string::npos);
  CHECK(s.find("g1") != std::string::npos);
  CHECK(s.find("o3:P") != std::string::npos);
}
