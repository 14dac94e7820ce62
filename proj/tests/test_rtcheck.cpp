#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>

#include "kog/rtcheck.hpp"
#include "util.hpp"

using namespace kog;

namespace {

bool anyContains(const std::vector<std::string>& msgs, const std::string& needle) {
  return std::any_of(msgs.begin(), msgs.end(), [&](const std::string& m) {
    return m.find(needle) != std::string::npos;
  });
}

}  // namespace

TEST_CASE("the initial configuration of every bundled program is well-typed") {
  for (const char* name :
       {"editor.kog", "selfcall.kog", "groupcall.kog", "leave2.kog", "stuck_mutual.kog",
        "stuck_acquire.kog"}) {
    CAPTURE(name);
    Program p = testutil::loadGood(name);
    auto msgs = checkConfig(p, initialConfiguration(p));
    for (const auto& m : msgs) CAPTURE(m);
    CHECK(msgs.empty());
  }
}

TEST_CASE("canonicalEnv types objects at their class and groups at their exports") {
  Program p = testutil::loadGood("groupcall.kog");
  RunResult r = run(p, {Policy::RoundRobin, 0, 100000});
  REQUIRE(r.outcome == Outcome::Terminated);
  RuntimeEnv env = canonicalEnv(p, r.final_);
  REQUIRE(env.objEnv.count(1));
  CHECK(env.objEnv.at(1) == Type::cls("Main"));
  REQUIRE(env.grpEnv.count(1));
  CHECK(env.grpEnv.at(1) == Type::group({"Ping"}));
}

TEST_CASE("well-typedness is preserved along every reachable transition") {
  struct Case {
    const char* name;
    ExploreOptions opts;
  };
  const Case cases[] = {
      {"groupcall.kog", {500, 100000}},
      {"selfcall.kog", {500, 100000}},
      {"leave2.kog", {500, 100000}},
      {"stuck_acquire.kog", {500, 100000}},
      {"editor.kog", {60, 20000}},  // bounded slice; the full run is in acceptance
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    Program p = testutil::loadGood(c.name);
    RtReport rep = checkReachable(p, c.opts);
    for (const auto& v : rep.violations)
      for (const auto& m : v.messages) CAPTURE(m);
    CHECK(rep.ok());
    CHECK(rep.statesChecked > 1);
  }
}

TEST_CASE("violations carry a digest and a replayable path") {
  // without the static gate, the missing method reaches an error process,
  // which the configuration checker must flag
  Program p = testutil::parseSource(
      "interface I { } class C() implements I { }"
      "{ I x; Bool b; x = new C(); b = x.m(b); }");
  RtReport rep = checkReachable(p, {500, 100000});
  REQUIRE_FALSE(rep.ok());
  // the body itself is ill-typed, so the initial state is already flagged
  CHECK(rep.violations.front().path.empty());
  CHECK(anyContains(rep.violations.front().messages, "no matching method"));
  // once the call fires, the callee holds an error process, reached by a
  // replayable witness path
  const Violation* withErr = nullptr;
  for (const auto& v : rep.violations)
    if (anyContains(v.messages, "error process")) withErr = &v;
  REQUIRE(withErr != nullptr);
  CHECK(withErr->digest != 0);
  CHECK_FALSE(withErr->path.empty());
}

TEST_CASE("hand-built ill-typed configurations are rejected") {
  Program p = testutil::parseSource(
      "interface I { } class C() implements I { Bool f; } { skip; }");
  Configuration base = initialConfiguration(p);

  SUBCASE("a Bool slot holding null violates slot inhabitation") {
    Configuration cn = base;
    ObjectState o;
    o.id = 2;
    o.cls = "C";
    o.fields["f"] = {Type::boolean(), Value::null()};
    o.fields["this"] = {Type::cls("C"), Value::obj(2)};
    cn.objects[2] = o;
    cn.nextObj = 3;
    auto msgs = checkConfig(p, cn);
    CHECK(anyContains(msgs, "RTT-Sub"));
  }

  SUBCASE("an export whose value does not support the interface") {
    Configuration cn = base;
    GroupState g;
    g.id = 1;
    g.exports.insert({Value::boolean(true), "I"});
    cn.groups[1] = g;
    cn.nextGrp = 2;
    auto msgs = checkConfig(p, cn);
    CHECK(anyContains(msgs, "RTT-Exp"));
  }

  SUBCASE("a dangling object reference in an export") {
    Configuration cn = base;
    GroupState g;
    g.id = 1;
    g.exports.insert({Value::obj(9), "I"});
    cn.groups[1] = g;
    cn.nextGrp = 2;
    CHECK_FALSE(checkConfig(p, cn).empty());
  }

  SUBCASE("an error process is reported under RTT-Proc") {
    Configuration cn = base;
    Process err;
    err.method = "m";
    err.isError = true;
    cn.objects.at(1).stack.push_back(err);
    auto msgs = checkConfig(p, cn);
    CHECK(anyContains(msgs, "RTT-Proc"));
  }
}

TEST_CASE("a group entry may move down the subtype order but never up") {
  // leave2 removes a redundant exporter: the canonical group type afterwards
  // must still sit below the type before, which checkReachable verifies on
  // every edge; here we additionally pin the endpoint types
  Program p = testutil::loadGood("leave2.kog");
  RunResult r = run(p, {Policy::RoundRobin, 0, 100000});
  REQUIRE(r.outcome == Outcome::Terminated);
  RuntimeEnv env = canonicalEnv(p, r.final_);
  REQUIRE(env.grpEnv.count(1));
  CHECK(subtype(p, env.grpEnv.at(1), Type::group({"Svc"})));
}

TEST_CASE("the checker is bounded and reports truncation") {
  Program p = testutil::loadGood("editor.kog");
  RtReport rep = checkReachable(p, {4, 100000});
  CHECK(rep.truncated);
  CHECK(rep.ok());
}
