#include "kog/printer.hpp"

#include <sstream>

namespace kog {

namespace {

std::string typeStr(const Type& t) {
  switch (t.kind) {
    case TypeKind::Bool: return "Bool";
    case TypeKind::Any: return "Any";
    case TypeKind::Iface: return t.name;
    case TypeKind::Class: return t.name;  // never printed in source positions
    case TypeKind::Group: {
      std::string s = "Group<";
      bool first = true;
      for (const auto& i : t.ifaces) {
        if (!first) s += ",";
        s += i;
        first = false;
      }
      return s + ">";
    }
  }
  return "?";
}

std::string joinNames(const std::vector<std::string>& xs) {
  std::string s;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) s += ", ";
    s += xs[i];
  }
  return s;
}

std::string exprStr(const Expr& e) {
  switch (e.kind) {
    case ExprKind::Var: return e.var;
    case ExprKind::BoolLit: return e.boolval ? "true" : "false";
    case ExprKind::NewGroup: return "newgroup";
    case ExprKind::New: return "new " + e.name + "(" + joinNames(e.args) + ")";
    case ExprKind::Call: {
      std::string tgt = e.target ? e.target->str() : e.var;
      return tgt + "." + e.name + "(" + joinNames(e.args) + ")";
    }
    case ExprKind::Acquire: {
      std::string s = "acquire " + e.name;
      if (!e.var.empty()) s += " in " + e.var;
      if (!e.args.empty())
        s += " except " + joinNames(e.args);
      else if (e.exceptEmptyset)
        s += " except emptyset";
      return s;
    }
    case ExprKind::Wait: return "wait(o" + std::to_string(e.waitObj) + "," + e.name + ")";
    case ExprKind::Lit: return e.lit->str();
  }
  return "?";
}

std::string ifaceList(const std::vector<std::string>& xs) { return joinNames(xs); }

void printStmts(std::ostringstream& os, const std::vector<StmtPtr>& body, int indent);

void printStmt(std::ostringstream& os, const Stmt& s, int indent) {
  std::string pad(indent, ' ');
  switch (s.kind) {
    case StmtKind::Skip:
      os << pad << "skip;\n";
      break;
    case StmtKind::ScopeEnd:
      os << pad << "/* scope-end " << s.var << " */\n";
      break;
    case StmtKind::Assign:
      os << pad << s.var << " = " << exprStr(s.expr) << ";\n";
      break;
    case StmtKind::If:
      os << pad << "if " << s.var << " {\n";
      printStmts(os, s.body1, indent + 2);
      os << pad << "} else {\n";
      printStmts(os, s.body2, indent + 2);
      os << pad << "}\n";
      break;
    case StmtKind::While:
      os << pad << "while " << s.var << " {\n";
      printStmts(os, s.body1, indent + 2);
      os << pad << "}\n";
      break;
    case StmtKind::Joins:
      os << pad << s.var << " joins " << s.var2 << " as " << ifaceList(s.ifaces) << ";\n";
      break;
    case StmtKind::Leaves:
      os << pad << s.var << " leaves " << s.var2 << " as " << ifaceList(s.ifaces) << " {\n";
      printStmts(os, s.body1, indent + 2);
      os << pad << "} else {\n";
      printStmts(os, s.body2, indent + 2);
      os << pad << "}\n";
      break;
    case StmtKind::SubtypeOf:
      os << pad << s.var << " subtypeOf " << s.ifaces[0];
      if (!s.var2.empty() && s.var2[0] != '$') os << " " << s.var2;
      os << " {\n";
      printStmts(os, s.body1, indent + 2);
      os << pad << "} else {\n";
      printStmts(os, s.body2, indent + 2);
      os << pad << "}\n";
      break;
  }
}

void printStmts(std::ostringstream& os, const std::vector<StmtPtr>& body, int indent) {
  for (const auto& s : body) printStmt(os, *s, indent);
}

void printDecls(std::ostringstream& os, const std::vector<Param>& ps, int indent) {
  std::string pad(indent, ' ');
  for (const auto& pr : ps) os << pad << typeStr(pr.type) << " " << pr.name << ";\n";
}

std::string paramList(const std::vector<Param>& ps) {
  std::string s;
  for (size_t i = 0; i < ps.size(); ++i) {
    if (i) s += ", ";
    s += typeStr(ps[i].type) + " " + ps[i].name;
  }
  return s;
}

}  // namespace

std::string toSource(const Type& t) { return typeStr(t); }

std::string toSource(const Program& p) {
  std::ostringstream os;
  for (const auto& d : p.interfaces) {
    os << "interface " << d.name;
    if (!d.extends.empty()) {
      os << " extends ";
      bool first = true;
      for (const auto& e : d.extends) {
        if (!first) os << ", ";
        os << e;
        first = false;
      }
    }
    os << " {\n";
    for (const auto& sg : d.sigs)
      os << "  " << typeStr(sg.ret) << " " << sg.name << "(" << paramList(sg.params) << ");\n";
    os << "}\n\n";
  }
  for (const auto& c : p.classes) {
    os << "class " << c.name << "(" << paramList(c.ctorParams) << ")";
    if (!c.implements.empty()) {
      os << " implements ";
      bool first = true;
      for (const auto& i : c.implements) {
        if (!first) os << ", ";
        os << i;
        first = false;
      }
    }
    os << " {\n";
    printDecls(os, c.fields, 2);
    if (!c.init.locals.empty() || !c.init.body.empty()) {
      os << "  {\n";
      printDecls(os, c.init.locals, 4);
      printStmts(os, c.init.body, 4);
      os << "  }\n";
    }
    for (const auto& m : c.methods) {
      bool isVoid = !m.returnVar.empty() && m.returnVar[0] == '$';
      os << "  " << (isVoid ? "void" : typeStr(m.sig.ret)) << " " << m.sig.name << "("
         << paramList(m.sig.params) << ") {\n";
      for (const auto& l : m.locals)
        if (l.name[0] != '$') os << "    " << typeStr(l.type) << " " << l.name << ";\n";
      printStmts(os, m.body, 4);
      if (isVoid)
        os << "    return;\n";
      else
        os << "    return " << m.returnVar << ";\n";
      os << "  }\n";
    }
    os << "}\n\n";
  }
  os << "{\n";
  printDecls(os, p.mainBlock.locals, 2);
  printStmts(os, p.mainBlock.body, 2);
  os << "}\n";
  return os.str();
}

std::string render(const Expr& e) { return exprStr(e); }

std::string render(const Stmt& s) {
  switch (s.kind) {
    case StmtKind::Skip: return "skip";
    case StmtKind::ScopeEnd: return "scope-end " + s.var;
    case StmtKind::Assign: return s.var + " = " + exprStr(s.expr);
    case StmtKind::If: return "if " + s.var + " {...} else {...}";
    case StmtKind::While: return "while " + s.var + " {...}";
    case StmtKind::Joins: return s.var + " joins " + s.var2 + " as " + ifaceList(s.ifaces);
    case StmtKind::Leaves: return s.var + " leaves " + s.var2 + " as " + ifaceList(s.ifaces) + " {...} else {...}";
    case StmtKind::SubtypeOf: return s.var + " subtypeOf " + s.ifaces[0] + " {...} else {...}";
  }
  return "?";
}

}  // namespace kog
