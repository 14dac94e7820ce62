#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <filesystem>

#include "kog/parser.hpp"
#include "kog/printer.hpp"
#include "util.hpp"

using namespace kog;

TEST_CASE("lexer: kinds and positions") {
  ParseError err;
  auto toks = lex("class C() {\n  Bool x;\n}", err);
  REQUIRE(toks.has_value());
  CHECK((*toks)[0].kind == TokKind::Keyword);
  CHECK((*toks)[0].lexeme == "class");
  CHECK((*toks)[1].kind == TokKind::Ident);
  CHECK((*toks)[1].lexeme == "C");
  CHECK((*toks)[1].col == 7);
  // `Bool` on line 2
  bool found = false;
  for (const auto& t : *toks)
    if (t.lexeme == "Bool") {
      CHECK(t.line == 2);
      CHECK(t.col == 3);
      found = true;
    }
  CHECK(found);
  CHECK(toks->back().kind == TokKind::End);
}

TEST_CASE("lexer: comments and bad characters") {
  ParseError err;
  auto toks = lex("skip; // trailing words # $\nskip;", err);
  REQUIRE(toks.has_value());
  int skips = 0;
  for (const auto& t : *toks)
    if (t.lexeme == "skip") ++skips;
  CHECK(skips == 2);

  auto bad = lex("x = @;", err);
  CHECK_FALSE(bad.has_value());
  CHECK(err.line == 1);
  CHECK(err.col == 5);
}

TEST_CASE("empty interface with explicit Any") {
  Program p = testutil::parseSource("interface I extends Any { } { skip; }");
  REQUIRE(p.interfaces.size() == 1);
  CHECK(p.interfaces[0].name == "I");
  CHECK(p.interfaces[0].extends == std::set<std::string>{"Any"});
  CHECK(p.interfaces[0].sigs.empty());
}

TEST_CASE("acquire surface forms") {
  Program p = testutil::parseSource(
      "interface Dictionary { }"
      "{ Dictionary x; Group<> g; Dictionary y;"
      "  x = acquire Dictionary except emptyset;"
      "  y = acquire Dictionary in g except x, y; }");
  const Stmt& s1 = *p.mainBlock.body[0];
  REQUIRE(s1.expr.kind == ExprKind::Acquire);
  CHECK(s1.expr.name == "Dictionary");
  CHECK(s1.expr.var == "");  // no in-clause: system-wide
  CHECK(s1.expr.args.empty());
  CHECK(s1.expr.exceptEmptyset);

  const Stmt& s2 = *p.mainBlock.body[1];
  CHECK(s2.expr.var == "g");
  CHECK(s2.expr.args == std::vector<std::string>{"x", "y"});
}

TEST_CASE("void methods desugar to a dummy Bool return") {
  Program p = testutil::parseSource(
      "interface I { void m(Bool x); }"
      "class C() implements I { void m(Bool x) { skip; } }"
      "{ skip; }");
  CHECK(p.interfaces[0].sigs[0].ret == Type::boolean());
  const Method& m = p.classes[0].methods[0];
  CHECK(m.sig.ret == Type::boolean());
  CHECK(m.returnVar == "$ret");
  bool hasDummy = false;
  for (const auto& l : m.locals)
    if (l.name == "$ret" && l.type == Type::boolean()) hasDummy = true;
  CHECK(hasDummy);
}

TEST_CASE("subtypeOf without a variable gets a fresh name") {
  Program p = testutil::parseSource(
      "interface I { }"
      "{ Group<> g; g = newgroup; g subtypeOf I { skip; } else { skip; } }");
  const Stmt& q = *p.mainBlock.body[1];
  REQUIRE(q.kind == StmtKind::SubtypeOf);
  CHECK(q.ifaces == std::vector<std::string>{"I"});
  CHECK(q.var2.substr(0, 2) == "$q");
}

TEST_CASE("group types parse with empty and multi-element lists") {
  Program p = testutil::parseSource(
      "interface A { } interface B { }"
      "{ Group<> x; Group<A,B> y; skip; }");
  CHECK(p.mainBlock.locals[0].type == Type::group({}));
  CHECK(p.mainBlock.locals[1].type == Type::group({"A", "B"}));
}

TEST_CASE("parse errors carry a position inside the text") {
  auto res = parse("class C( { }");
  auto* pe = std::get_if<ParseError>(&res);
  REQUIRE(pe != nullptr);
  CHECK(pe->line >= 1);
  CHECK(pe->col >= 1);
  CHECK_FALSE(pe->expected.empty());

  auto res2 = parse("{ x ; }");
  CHECK(std::get_if<ParseError>(&res2) != nullptr);
}

TEST_CASE("the verbatim factory fixture parses to one class with two methods") {
  std::string src = testutil::readFile(std::string(KOG_FIXTURE_DIR) + "/factory_verbatim.kog");
  auto res = parse(src);
  auto* p = std::get_if<Program>(&res);
  REQUIRE(p != nullptr);
  CHECK(p->interfaces.size() == 3);
  REQUIRE(p->classes.size() == 1);
  CHECK(p->classes[0].name == "Factory");
  CHECK(p->classes[0].methods.size() == 2);
  CHECK(p->classes[0].methods[0].sig.name == "makeEditor");
  CHECK(p->classes[0].methods[1].sig.name == "replaceDictionary");
}

TEST_CASE("round-trip: pretty-printed corpus reparses to the same normal form") {
  namespace fs = std::filesystem;
  std::vector<std::string> files;
  for (const auto& e : fs::directory_iterator(KOG_CORPUS_DIR))
    if (e.path().extension() == ".kog") files.push_back(e.path().string());
  for (const auto& e : fs::directory_iterator(std::string(KOG_CORPUS_DIR) + "/negative"))
    if (e.path().extension() == ".kog") files.push_back(e.path().string());
  files.push_back(std::string(KOG_FIXTURE_DIR) + "/factory_verbatim.kog");
  REQUIRE(files.size() >= 17);
  for (const auto& f : files) {
    CAPTURE(f);
    auto res = parse(testutil::readFile(f));
    auto* p1 = std::get_if<Program>(&res);
    REQUIRE(p1 != nullptr);
    std::string printed = toSource(*p1);
    auto res2 = parse(printed);
    auto* p2 = std::get_if<Program>(&res2);
    REQUIRE(p2 != nullptr);
    CHECK(toSource(*p2) == printed);
  }
}
