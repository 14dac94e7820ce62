#include "kog/parser.hpp"

#include <cctype>
#include <set>

namespace kog {

namespace {

const std::set<std::string> kKeywords = {
    "interface", "extends", "class",     "implements", "new",  "newgroup", "acquire",
    "in",        "except",  "joins",     "as",         "leaves", "subtypeOf", "if",
    "else",      "while",   "skip",      "return",     "true", "false",    "Bool",
    "Any",       "Group",   "this",      "emptyset"};

}  // namespace

std::string ParseError::str() const {
  std::string s = std::to_string(line) + ":" + std::to_string(col) + ": " + message;
  if (!expected.empty()) {
    s += " (expected ";
    for (size_t i = 0; i < expected.size(); ++i) {
      if (i) s += ", ";
      s += expected[i];
    }
    s += ")";
  }
  return s;
}

std::optional<std::vector<Token>> lex(const std::string& src, ParseError& err) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  auto advance = [&](char c) {
    if (c == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
      while (i < src.size() && src[i] != '\n') {
        advance(src[i]);
        ++i;
      }
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(c);
      ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      int l = line, co = col;
      std::string w;
      while (i < src.size() &&
             (std::isalnum(static_cast<unsigned char>(src[i])) || src[i] == '_')) {
        w += src[i];
        advance(src[i]);
        ++i;
      }
      out.push_back({kKeywords.count(w) ? TokKind::Keyword : TokKind::Ident, w, l, co});
      continue;
    }
    static const std::string punct = "{}()<>,;=.";
    if (punct.find(c) != std::string::npos) {
      out.push_back({TokKind::Punct, std::string(1, c), line, col});
      advance(c);
      ++i;
      continue;
    }
    err = {"unexpected character '" + std::string(1, c) + "'", {}, line, col};
    return std::nullopt;
  }
  out.push_back({TokKind::End, "", line, col});
  return out;
}

namespace {

struct Parser {
  std::vector<Token> toks;
  size_t pos = 0;
  int freshCounter = 0;

  struct Fail {
    ParseError e;
  };

  const Token& cur() const { return toks[pos]; }
  const Token& peek(size_t n = 1) const { return toks[std::min(pos + n, toks.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg, std::vector<std::string> expected = {}) {
    throw Fail{ParseError{msg, std::move(expected), cur().line, cur().col}};
  }

  bool at(const std::string& lexeme) const {
    return cur().kind != TokKind::End && cur().lexeme == lexeme;
  }
  bool atIdent() const { return cur().kind == TokKind::Ident; }

  Token eat(const std::string& lexeme) {
    if (!at(lexeme)) fail("unexpected '" + cur().lexeme + "'", {"'" + lexeme + "'"});
    return toks[pos++];
  }
  Token eatIdent(const std::string& what) {
    if (!atIdent()) fail("unexpected '" + cur().lexeme + "'", {what});
    return toks[pos++];
  }
  bool accept(const std::string& lexeme) {
    if (at(lexeme)) {
      ++pos;
      return true;
    }
    return false;
  }

  std::string varName() {
    if (at("this")) {
      ++pos;
      return "this";
    }
    return eatIdent("variable name").lexeme;
  }

  // a type may start here?
  bool atType() const {
    return at("Bool") || at("Any") || at("Group") || atIdent();
  }

  Type type() {
    if (accept("Bool")) return Type::boolean();
    if (accept("Any")) return Type::any();
    if (accept("Group")) {
      eat("<");
      std::set<std::string> s;
      if (!at(">")) {
        s.insert(eatIdent("interface name").lexeme);
        while (accept(",")) s.insert(eatIdent("interface name").lexeme);
      }
      eat(">");
      return Type::group(std::move(s));
    }
    return Type::iface(eatIdent("type name").lexeme);
  }

  std::vector<std::string> identList() {
    std::vector<std::string> out;
    out.push_back(at("Any") ? eat("Any").lexeme : eatIdent("interface name").lexeme);
    while (accept(","))
      out.push_back(at("Any") ? eat("Any").lexeme : eatIdent("interface name").lexeme);
    return out;
  }

  std::vector<Param> paramList() {
    std::vector<Param> out;
    if (at(")")) return out;
    do {
      Type t = type();
      std::string n = eatIdent("parameter name").lexeme;
      out.push_back({n, t});
    } while (accept(","));
    return out;
  }

  std::vector<std::string> argList() {
    std::vector<std::string> out;
    if (at(")")) return out;
    do out.push_back(varName());
    while (accept(","));
    return out;
  }

  Expr expr() {
    Expr e;
    e.line = cur().line;
    e.col = cur().col;
    if (at("true") || at("false")) {
      e.kind = ExprKind::BoolLit;
      e.boolval = at("true");
      ++pos;
      return e;
    }
    if (accept("newgroup")) {
      e.kind = ExprKind::NewGroup;
      return e;
    }
    if (accept("new")) {
      e.kind = ExprKind::New;
      e.name = eatIdent("class name").lexeme;
      eat("(");
      e.args = argList();
      eat(")");
      return e;
    }
    if (accept("acquire")) {
      e.kind = ExprKind::Acquire;
      e.name = at("Any") ? eat("Any").lexeme : eatIdent("interface name").lexeme;
      if (accept("in")) e.var = varName();
      if (accept("except")) {
        if (accept("emptyset"))
          e.exceptEmptyset = true;
        else {
          e.args.push_back(varName());
          while (accept(",")) e.args.push_back(varName());
        }
      }
      return e;
    }
    // variable or method call
    e.var = varName();
    if (accept(".")) {
      e.kind = ExprKind::Call;
      e.name = eatIdent("method name").lexeme;
      eat("(");
      e.args = argList();
      eat(")");
    } else {
      e.kind = ExprKind::Var;
    }
    return e;
  }

  std::vector<StmtPtr> block() {
    eat("{");
    std::vector<StmtPtr> out = stmts();
    eat("}");
    return out;
  }

  std::vector<StmtPtr> stmts() {
    std::vector<StmtPtr> out;
    while (!at("}") && !at("return") && cur().kind != TokKind::End) out.push_back(stmt());
    return out;
  }

  StmtPtr stmt() {
    auto s = std::make_shared<Stmt>();
    s->line = cur().line;
    s->col = cur().col;
    if (accept("skip")) {
      s->kind = StmtKind::Skip;
      eat(";");
      return s;
    }
    if (accept("if")) {
      s->kind = StmtKind::If;
      s->var = varName();
      s->body1 = block();
      eat("else");
      s->body2 = block();
      accept(";");
      return s;
    }
    if (accept("while")) {
      s->kind = StmtKind::While;
      s->var = varName();
      s->body1 = block();
      accept(";");
      return s;
    }
    // statements led by a variable
    std::string x = varName();
    if (accept("=")) {
      s->kind = StmtKind::Assign;
      s->var = x;
      s->expr = expr();
      eat(";");
      return s;
    }
    if (accept("joins")) {
      s->kind = StmtKind::Joins;
      s->var = x;
      s->var2 = varName();
      eat("as");
      s->ifaces = identList();
      eat(";");
      return s;
    }
    if (accept("leaves")) {
      s->kind = StmtKind::Leaves;
      s->var = x;
      s->var2 = varName();
      eat("as");
      s->ifaces = identList();
      s->body1 = block();
      eat("else");
      s->body2 = block();
      accept(";");
      return s;
    }
    if (accept("subtypeOf")) {
      s->kind = StmtKind::SubtypeOf;
      s->var = x;
      s->ifaces.push_back(at("Any") ? eat("Any").lexeme : eatIdent("interface name").lexeme);
      if (atIdent())
        s->var2 = eatIdent("variable name").lexeme;
      else
        s->var2 = "$q" + std::to_string(freshCounter++);
      s->body1 = block();
      eat("else");
      s->body2 = block();
      accept(";");
      return s;
    }
    fail("unexpected '" + cur().lexeme + "'", {"'='", "'joins'", "'leaves'", "'subtypeOf'"});
  }

  // does a `T x;` declaration start at the current position?
  bool declAhead() const {
    size_t j = pos;
    if (toks[j].lexeme == "Group") {
      if (peek(1).lexeme != "<") return false;
      j = pos + 2;
      while (j < toks.size() && toks[j].lexeme != ">" && toks[j].kind != TokKind::End) ++j;
      if (j >= toks.size() || toks[j].lexeme != ">") return false;
      ++j;
    } else if (toks[j].lexeme == "Bool" || toks[j].lexeme == "Any" ||
               toks[j].kind == TokKind::Ident) {
      ++j;
    } else {
      return false;
    }
    return j + 1 < toks.size() && toks[j].kind == TokKind::Ident && toks[j + 1].lexeme == ";";
  }

  // typed declarations at the head of a block: `T x;`
  std::vector<Param> decls() {
    std::vector<Param> out;
    while (true) {
      if (!declAhead()) break;
      Type t = type();
      std::string n = eatIdent("variable name").lexeme;
      eat(";");
      out.push_back({n, t});
    }
    return out;
  }

  Signature signature() {
    Signature sg;
    bool isVoid = atIdent() && cur().lexeme == "void";
    if (isVoid)
      ++pos;
    else
      sg.ret = type();
    if (isVoid) sg.ret = Type::boolean();
    sg.name = eatIdent("method name").lexeme;
    eat("(");
    sg.params = paramList();
    eat(")");
    return sg;
  }

  InterfaceDecl interfaceDecl() {
    InterfaceDecl d;
    d.line = cur().line;
    d.col = cur().col;
    eat("interface");
    d.name = eatIdent("interface name").lexeme;
    if (accept("extends"))
      for (const auto& n : identList()) d.extends.insert(n);
    eat("{");
    while (!at("}")) {
      Signature sg = signature();
      eat(";");
      d.sigs.push_back(std::move(sg));
    }
    eat("}");
    return d;
  }

  Method method() {
    Method m;
    m.line = cur().line;
    m.col = cur().col;
    bool isVoid = atIdent() && cur().lexeme == "void";
    m.sig = signature();
    eat("{");
    m.locals = decls();
    m.body = stmts();
    if (isVoid) {
      m.locals.push_back({"$ret", Type::boolean()});
      m.returnVar = "$ret";
      if (accept("return")) eat(";");
    } else {
      eat("return");
      m.returnVar = varName();
      eat(";");
    }
    eat("}");
    return m;
  }

  ClassDecl classDecl() {
    ClassDecl d;
    d.line = cur().line;
    d.col = cur().col;
    eat("class");
    d.name = eatIdent("class name").lexeme;
    eat("(");
    d.ctorParams = paramList();
    eat(")");
    if (accept("implements"))
      for (const auto& n : identList()) d.implements.insert(n);
    eat("{");
    d.fields = decls();
    if (at("{")) {
      eat("{");
      d.init.locals = decls();
      d.init.body = stmts();
      eat("}");
    }
    while (!at("}")) d.methods.push_back(method());
    eat("}");
    return d;
  }

  Program program() {
    Program p;
    while (at("interface")) p.interfaces.push_back(interfaceDecl());
    while (at("class")) p.classes.push_back(classDecl());
    eat("{");
    p.mainBlock.locals = decls();
    p.mainBlock.body = stmts();
    eat("}");
    if (cur().kind != TokKind::End) fail("trailing input after program");
    return p;
  }
};

}  // namespace

std::variant<Program, ParseError> parse(const std::string& src) {
  ParseError lexErr;
  auto toks = lex(src, lexErr);
  if (!toks) return lexErr;
  Parser ps{std::move(*toks)};
  try {
    return ps.program();
  } catch (const Parser::Fail& f) {
    return f.e;
  }
}

}  // namespace kog
