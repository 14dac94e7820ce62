#include "kog/ast.hpp"

#include <algorithm>
#include <functional>
#include <sstream>

#include "kog/typecheck.hpp"

namespace kog {

std::string Type::str() const {
  switch (kind) {
    case TypeKind::Bool: return "Bool";
    case TypeKind::Any: return "Any";
    case TypeKind::Iface: return name;
    case TypeKind::Class: return "class " + name;
    case TypeKind::Group: {
      std::string s = "Group<";
      bool first = true;
      for (const auto& i : ifaces) {
        if (!first) s += ",";
        s += i;
        first = false;
      }
      return s + ">";
    }
  }
  return "?";
}

std::string Value::str() const {
  switch (kind) {
    case Kind::Null: return "null";
    case Kind::Bool: return b ? "true" : "false";
    case Kind::Obj: return "o" + std::to_string(id);
    case Kind::Grp: return "g" + std::to_string(id);
  }
  return "?";
}

std::string Signature::shapeKey() const {
  std::string k = name + ":" + ret.str() + "(";
  for (const auto& pr : params) k += pr.type.str() + ",";
  return k + ")";
}

const InterfaceDecl* Program::iface(const std::string& n) const {
  auto it = ifaceIdx.find(n);
  return it == ifaceIdx.end() ? nullptr : &interfaces[it->second];
}

const ClassDecl* Program::cls(const std::string& n) const {
  auto it = classIdx.find(n);
  return it == classIdx.end() ? nullptr : &classes[it->second];
}

const Method* Program::method(const std::string& clsName, const std::string& m) const {
  const ClassDecl* c = cls(clsName);
  if (!c) return nullptr;
  for (const auto& mm : c->methods)
    if (mm.sig.name == m) return &mm;
  return nullptr;
}

bool ifaceLe(const Program& p, const std::string& a, const std::string& b) {
  if (a == b) return true;
  if (b == "Any") return true;
  if (a == "Any") return false;
  auto it = p.supers.find(a);
  return it != p.supers.end() && it->second.count(b) > 0;
}

bool ifaceLt(const Program& p, const std::string& a, const std::string& b) {
  return a != b && ifaceLe(p, a, b);
}

// ---------------------------------------------------------------------------
// Well-formedness
// ---------------------------------------------------------------------------

namespace {

void forEachStmt(const std::vector<StmtPtr>& ss, const std::function<void(const Stmt&)>& f) {
  for (const auto& s : ss) {
    f(*s);
    forEachStmt(s->body1, f);
    forEachStmt(s->body2, f);
  }
}

void checkTypeRef(const Program& p, const Type& t, int line, int col, std::vector<Diag>& out) {
  if (t.kind == TypeKind::Iface && !p.iface(t.name))
    out.push_back({"UndeclaredName", "unknown interface '" + t.name + "'", line, col});
  if (t.kind == TypeKind::Group)
    for (const auto& i : t.ifaces)
      if (i != "Any" && !p.iface(i))
        out.push_back({"UndeclaredName", "unknown interface '" + i + "' in group type", line, col});
  if (t.kind == TypeKind::Class)
    out.push_back({"UndeclaredName", "class name '" + t.name + "' used as a source type", line, col});
}

void checkDistinct(const std::vector<Param>& ps, const std::string& what, int line,
                   std::vector<Diag>& out) {
  std::set<std::string> seen;
  for (const auto& pr : ps) {
    if (pr.name == "this")
      out.push_back({"ReservedName", "'this' may not be declared", line, 0});
    if (!seen.insert(pr.name).second)
      out.push_back({"DuplicateName", "duplicate " + what + " '" + pr.name + "'", line, 0});
  }
}

void checkStmtRefs(const Program& p, const std::vector<StmtPtr>& body, std::vector<Diag>& out) {
  forEachStmt(body, [&](const Stmt& s) {
    for (const auto& i : s.ifaces)
      if (i != "Any" && !p.iface(i))
        out.push_back({"UndeclaredName", "unknown interface '" + i + "'", s.line, s.col});
    if (s.kind == StmtKind::Assign) {
      const Expr& e = s.expr;
      if (e.kind == ExprKind::New && !p.cls(e.name))
        out.push_back({"UndeclaredName", "unknown class '" + e.name + "'", e.line, e.col});
      if (e.kind == ExprKind::Acquire && e.name != "Any" && !p.iface(e.name))
        out.push_back({"UndeclaredName", "unknown interface '" + e.name + "'", e.line, e.col});
    }
  });
}

}  // namespace

std::vector<Diag> finalize(Program& p) {
  std::vector<Diag> out;
  p.ifaceIdx.clear();
  p.classIdx.clear();
  p.supers.clear();

  for (size_t i = 0; i < p.interfaces.size(); ++i) {
    const auto& d = p.interfaces[i];
    if (d.name == "Any" || d.name == "Bool")
      out.push_back({"ReservedName", "interface may not be named '" + d.name + "'", d.line, d.col});
    else if (!p.ifaceIdx.emplace(d.name, i).second)
      out.push_back({"DuplicateName", "duplicate interface '" + d.name + "'", d.line, d.col});
  }
  for (size_t i = 0; i < p.classes.size(); ++i) {
    const auto& d = p.classes[i];
    if (d.name == "Main")
      out.push_back({"ReservedName", "class may not be named 'Main'", d.line, d.col});
    else if (!p.classIdx.emplace(d.name, i).second)
      out.push_back({"DuplicateName", "duplicate class '" + d.name + "'", d.line, d.col});
  }

  // extends closure; cycle detection by coloring
  std::map<std::string, int> color;  // 0 unseen, 1 in progress, 2 done
  std::function<bool(const std::string&)> visit = [&](const std::string& n) -> bool {
    int& c = color[n];
    if (c == 1) return false;
    if (c == 2) return true;
    c = 1;
    const InterfaceDecl* d = p.iface(n);
    bool ok = true;
    if (d) {
      auto& sup = p.supers[n];
      for (const auto& e : d->extends) {
        if (e == "Any") continue;
        if (!p.iface(e)) {
          out.push_back({"UndeclaredName", "unknown interface '" + e + "' in extends", d->line, d->col});
          continue;
        }
        if (!visit(e)) {
          out.push_back({"CyclicExtends", "cyclic extends through '" + e + "'", d->line, d->col});
          ok = false;
          continue;
        }
        sup.insert(e);
        auto it = p.supers.find(e);
        if (it != p.supers.end()) sup.insert(it->second.begin(), it->second.end());
      }
    }
    c = ok ? 2 : 0;
    return ok;
  };
  for (const auto& d : p.interfaces) visit(d.name);

  // signatures
  for (const auto& d : p.interfaces) {
    std::set<std::string> names;
    for (const auto& sg : d.sigs) {
      if (!names.insert(sg.name).second)
        out.push_back({"DuplicateName", "duplicate signature '" + sg.name + "' in interface '" + d.name + "'",
                       d.line, d.col});
      checkTypeRef(p, sg.ret, d.line, d.col, out);
      checkDistinct(sg.params, "parameter", d.line, out);
      for (const auto& pr : sg.params) checkTypeRef(p, pr.type, d.line, d.col, out);
    }
    // inherited signatures for one name must agree (arity and types)
    std::map<std::string, std::set<std::string>> shapes;
    auto tySelf = Type::iface(d.name);
    if (auto sigs = mtd(p, tySelf)) {
      for (const auto& sg : *sigs) shapes[sg.name].insert(sg.shapeKey());
      for (const auto& [m, ks] : shapes)
        if (ks.size() > 1)
          out.push_back({"AmbiguousSignature",
                         "interface '" + d.name + "' inherits conflicting signatures for '" + m + "'",
                         d.line, d.col});
    }
  }

  for (const auto& c : p.classes) {
    checkDistinct(c.ctorParams, "class parameter", c.line, out);
    checkDistinct(c.fields, "field", c.line, out);
    checkDistinct(c.init.locals, "init local", c.line, out);
    for (const auto& pr : c.ctorParams) checkTypeRef(p, pr.type, c.line, c.col, out);
    for (const auto& pr : c.fields) checkTypeRef(p, pr.type, c.line, c.col, out);
    for (const auto& pr : c.init.locals) checkTypeRef(p, pr.type, c.line, c.col, out);
    // fields and constructor parameters share the object state at runtime
    std::set<std::string> fieldNames;
    for (const auto& f : c.fields) fieldNames.insert(f.name);
    for (const auto& pr : c.ctorParams)
      if (fieldNames.count(pr.name))
        out.push_back({"DuplicateName", "class parameter '" + pr.name + "' collides with a field", c.line, c.col});
    for (const auto& i : c.implements)
      if (i != "Any" && !p.iface(i))
        out.push_back({"UndeclaredName", "unknown interface '" + i + "' in implements", c.line, c.col});
    std::set<std::string> mnames;
    for (const auto& m : c.methods) {
      if (!mnames.insert(m.sig.name).second)
        out.push_back({"DuplicateName", "duplicate method '" + m.sig.name + "' in class '" + c.name + "'",
                       m.line, m.col});
      checkTypeRef(p, m.sig.ret, m.line, m.col, out);
      checkDistinct(m.sig.params, "parameter", m.line, out);
      checkDistinct(m.locals, "local", m.line, out);
      std::set<std::string> pn;
      for (const auto& pr : m.sig.params) pn.insert(pr.name);
      for (const auto& l : m.locals)
        if (pn.count(l.name))
          out.push_back({"DuplicateName", "local '" + l.name + "' collides with a parameter", m.line, m.col});
      for (const auto& pr : m.sig.params) checkTypeRef(p, pr.type, m.line, m.col, out);
      for (const auto& l : m.locals) checkTypeRef(p, l.type, m.line, m.col, out);
      checkStmtRefs(p, m.body, out);
    }
    checkStmtRefs(p, c.init.body, out);
  }
  checkDistinct(p.mainBlock.locals, "main local", 0, out);
  for (const auto& l : p.mainBlock.locals) checkTypeRef(p, l.type, 0, 0, out);
  checkStmtRefs(p, p.mainBlock.body, out);
  return out;
}

// ---------------------------------------------------------------------------
// Lookups
// ---------------------------------------------------------------------------

std::optional<std::vector<Signature>> mtd(const Program& p, const Type& t) {
  std::vector<Signature> out;
  std::set<std::string> seen;
  auto add = [&](const Signature& sg) {
    if (seen.insert(sg.shapeKey()).second) out.push_back(sg);
  };
  switch (t.kind) {
    case TypeKind::Bool:
    case TypeKind::Any:
      return out;
    case TypeKind::Iface: {
      if (t.name == "Any") return out;
      const InterfaceDecl* d = p.iface(t.name);
      if (!d) return std::nullopt;
      for (const auto& sg : d->sigs) add(sg);
      auto it = p.supers.find(t.name);
      if (it != p.supers.end())
        for (const auto& sup : it->second) {
          const InterfaceDecl* sd = p.iface(sup);
          if (sd)
            for (const auto& sg : sd->sigs) add(sg);
        }
      return out;
    }
    case TypeKind::Group: {
      for (const auto& i : t.ifaces) {
        auto sub = mtd(p, Type::iface(i));
        if (!sub) return std::nullopt;
        for (const auto& sg : *sub) add(sg);
      }
      return out;
    }
    case TypeKind::Class: {
      const ClassDecl* c = p.cls(t.name);
      if (!c) return std::nullopt;
      for (const auto& m : c->methods) add(m.sig);
      return out;
    }
  }
  return std::nullopt;
}

bool matchCall(const Program& p, const std::string& m,
               const std::vector<Type>& argTypes, const Type& t) {
  auto sigs = mtd(p, t);
  if (!sigs) return false;
  for (const auto& sg : *sigs) {
    if (sg.name != m || sg.params.size() != argTypes.size()) continue;
    bool ok = true;
    for (size_t i = 0; i < argTypes.size(); ++i)
      if (!subtype(p, argTypes[i], sg.params[i].type)) {
        ok = false;
        break;
      }
    if (ok) return true;
  }
  return false;
}

Lookup retType(const Program& p, const Type& t, const std::string& m, Type& out) {
  auto sigs = mtd(p, t);
  if (!sigs) return Lookup::Undeclared;
  std::set<std::string> shapes;
  bool found = false;
  for (const auto& sg : *sigs)
    if (sg.name == m) {
      if (!found) out = sg.ret;
      found = true;
      shapes.insert(sg.shapeKey());
    }
  if (!found) return Lookup::NoSuchMethod;
  if (shapes.size() > 1) return Lookup::Ambiguous;
  return Lookup::Ok;
}

std::optional<std::vector<Type>> ptypes(const Program& p, const std::string& clsName) {
  const ClassDecl* c = p.cls(clsName);
  if (!c) return std::nullopt;
  std::vector<Type> out;
  for (const auto& pr : c->ctorParams) out.push_back(pr.type);
  return out;
}

std::optional<bool> implementsIface(const Program& p, const std::string& clsName,
                                    const std::string& ifaceName) {
  const ClassDecl* c = p.cls(clsName);
  if (!c) return std::nullopt;
  if (ifaceName != "Any" && !p.iface(ifaceName)) return std::nullopt;
  if (ifaceName == "Any") return true;
  for (const auto& i : c->implements)
    if (ifaceLe(p, i, ifaceName)) return true;
  return false;
}

}  // namespace kog
