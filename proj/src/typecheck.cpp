#include "kog/typecheck.hpp"

#include <algorithm>

namespace kog {

bool subtype(const Program& p, const Type& a, const Type& b) {
  if (a == b) return true;
  switch (a.kind) {
    case TypeKind::Bool:
      return false;  // Bool relates only to itself
    case TypeKind::Any:
      return b.kind == TypeKind::Iface && b.name == "Any";
    case TypeKind::Iface:
      if (b.kind == TypeKind::Any) return true;
      if (b.kind == TypeKind::Iface) return ifaceLe(p, a.name, b.name);
      return false;
    case TypeKind::Group:
      if (b.kind == TypeKind::Iface || b.kind == TypeKind::Any) {
        std::string target = b.kind == TypeKind::Any ? "Any" : b.name;
        for (const auto& j : a.ifaces)
          if (ifaceLe(p, j, target)) return true;
        return false;
      }
      if (b.kind == TypeKind::Group) {
        for (const auto& j : b.ifaces) {
          bool covered = false;
          for (const auto& i : a.ifaces)
            if (ifaceLe(p, i, j)) {
              covered = true;
              break;
            }
          if (!covered) return false;
        }
        return true;
      }
      return false;
    case TypeKind::Class:
      if (b.kind == TypeKind::Any) return true;
      if (b.kind == TypeKind::Iface)
        return implementsIface(p, a.name, b.name).value_or(false);
      return false;
  }
  return false;
}

Ctx compose(const Ctx& a, const Ctx& b) {
  Ctx out = a;
  for (const auto& [k, v] : b) out[k] = v;
  return out;
}

Type bestSupertype(const Program& p, const Type& a, const Type& b) {
  if (a == b) return a;
  if (a.kind == TypeKind::Group && b.kind == TypeKind::Group) {
    std::set<std::string> inter;
    std::set_intersection(a.ifaces.begin(), a.ifaces.end(), b.ifaces.begin(), b.ifaces.end(),
                          std::inserter(inter, inter.begin()));
    return Type::group(std::move(inter));
  }
  if (subtype(p, a, b)) return b;
  if (subtype(p, b, a)) return a;
  // unique minimal common super-interface, else Any
  std::vector<Type> candidates;
  for (const auto& d : p.interfaces) {
    Type t = Type::iface(d.name);
    if (subtype(p, a, t) && subtype(p, b, t)) candidates.push_back(t);
  }
  for (const auto& c : candidates) {
    bool least = true;
    for (const auto& other : candidates)
      if (!subtype(p, c, other)) {
        least = false;
        break;
      }
    if (least) return c;
  }
  return Type::any();
}

Ctx intersect(const Program& p, const Ctx& a, const Ctx& b) {
  Ctx out;
  for (const auto& [k, v] : a) {
    auto it = b.find(k);
    if (it != b.end()) out[k] = bestSupertype(p, v, it->second);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Expressions
// ---------------------------------------------------------------------------

namespace {

Diag err(const std::string& rule, const std::string& msg, int line, int col) {
  return Diag{rule, msg, line, col};
}

std::optional<Type> varType(const Ctx& g, const std::string& x) {
  auto it = g.find(x);
  if (it == g.end()) return std::nullopt;
  return it->second;
}

}  // namespace

std::optional<Diag> checkExpr(const Program& p, const Ctx& gamma, const Expr& e,
                              const Type& expected, const RtHooks* hooks) {
  switch (e.kind) {
    case ExprKind::Var: {
      auto t = varType(gamma, e.var);
      if (!t) return err("T-Var", "unbound variable '" + e.var + "'", e.line, e.col);
      if (!subtype(p, *t, expected))
        return err("T-Var", "variable '" + e.var + "' has type " + t->str() +
                                ", expected " + expected.str(),
                   e.line, e.col);
      return std::nullopt;
    }
    case ExprKind::BoolLit:
      if (expected.kind != TypeKind::Bool)
        return err("T-Bool", "boolean literal where " + expected.str() + " is expected", e.line, e.col);
      return std::nullopt;
    case ExprKind::Call: {
      Type tgt;
      if (e.target) {
        // null inhabits every reference type, so a null receiver types at
        // whatever interface offers the method (the call itself then faults)
        if (e.target->kind == Value::Kind::Null) return std::nullopt;
        if (!hooks || !hooks->litType)
          return err("T-Call", "rewritten call receiver outside runtime checking", e.line, e.col);
        auto t = hooks->litType(*e.target);
        if (!t) return err("T-Call", "call receiver " + e.target->str() + " has no type", e.line, e.col);
        tgt = *t;
      } else {
        auto t = varType(gamma, e.var);
        if (!t) return err("T-Var", "unbound variable '" + e.var + "'", e.line, e.col);
        tgt = *t;
      }
      std::vector<Type> argTypes;
      for (const auto& a : e.args) {
        auto t = varType(gamma, a);
        if (!t) return err("T-Var", "unbound variable '" + a + "'", e.line, e.col);
        argTypes.push_back(*t);
      }
      if (!matchCall(p, e.name, argTypes, tgt))
        return err("T-Call", "no matching method '" + e.name + "' on " + tgt.str(), e.line, e.col);
      Type ret;
      Lookup st = retType(p, tgt, e.name, ret);
      if (st == Lookup::Ambiguous)
        return err("T-Call", "ambiguous signatures for '" + e.name + "' on " + tgt.str(), e.line, e.col);
      if (st != Lookup::Ok)
        return err("T-Call", "no method '" + e.name + "' on " + tgt.str(), e.line, e.col);
      if (!subtype(p, ret, expected))
        return err("T-Call", "'" + e.name + "' returns " + ret.str() + ", expected " + expected.str(),
                   e.line, e.col);
      return std::nullopt;
    }
    case ExprKind::New: {
      auto ps = ptypes(p, e.name);
      if (!ps) return err("T-New", "unknown class '" + e.name + "'", e.line, e.col);
      if (ps->size() != e.args.size())
        return err("T-New", "constructor of '" + e.name + "' takes " + std::to_string(ps->size()) +
                                " argument(s)",
                   e.line, e.col);
      for (size_t i = 0; i < e.args.size(); ++i) {
        auto t = varType(gamma, e.args[i]);
        if (!t) return err("T-Var", "unbound variable '" + e.args[i] + "'", e.line, e.col);
        if (!subtype(p, *t, (*ps)[i]))
          return err("T-New", "argument '" + e.args[i] + "' has type " + t->str() + ", expected " +
                                  (*ps)[i].str(),
                     e.line, e.col);
      }
      bool ok = false;
      if (expected.kind == TypeKind::Any)
        ok = true;
      else if (expected.kind == TypeKind::Iface)
        ok = implementsIface(p, e.name, expected.name).value_or(false);
      if (!ok)
        return err("T-New", "class '" + e.name + "' is not a subtype of " + expected.str(), e.line, e.col);
      return std::nullopt;
    }
    case ExprKind::NewGroup:
      if (!subtype(p, Type::group({}), expected))
        return err("T-Group", "newgroup has type Group<>, expected " + expected.str(), e.line, e.col);
      return std::nullopt;
    case ExprKind::Acquire: {
      if (!e.var.empty()) {
        auto t = varType(gamma, e.var);
        if (!t) return err("T-Var", "unbound variable '" + e.var + "'", e.line, e.col);
        if (t->kind != TypeKind::Group)
          return err("T-Acquire", "'in' target '" + e.var + "' is not group-typed", e.line, e.col);
      }
      for (const auto& x : e.args) {
        auto t = varType(gamma, x);
        if (!t) return err("T-Var", "unbound variable '" + x + "'", e.line, e.col);
        if (!t->isRef())
          return err("T-Acquire", "'except' variable '" + x + "' is not reference-typed", e.line, e.col);
      }
      if (!subtype(p, Type::iface(e.name), expected))
        return err("T-Acquire", "acquire yields " + e.name + ", expected " + expected.str(), e.line, e.col);
      return std::nullopt;
    }
    case ExprKind::Wait: {
      if (!hooks || !hooks->waitType)
        return err("RTT-Wait", "wait expression outside runtime checking", e.line, e.col);
      auto t = hooks->waitType(e.waitObj, e.name);
      if (!t)
        return err("RTT-Wait", "wait(o" + std::to_string(e.waitObj) + "," + e.name +
                                   ") does not resolve to a method",
                   e.line, e.col);
      if (!subtype(p, *t, expected))
        return err("RTT-Wait", "wait yields " + t->str() + ", expected " + expected.str(), e.line, e.col);
      return std::nullopt;
    }
    case ExprKind::Lit: {
      const Value& v = *e.lit;
      if (v.kind == Value::Kind::Null) {
        if (!expected.isRef())
          return err("RTT-Sub", "null where " + expected.str() + " is expected", e.line, e.col);
        return std::nullopt;
      }
      if (v.kind == Value::Kind::Bool) {
        if (expected.kind != TypeKind::Bool)
          return err("RTT-Sub", "boolean value where " + expected.str() + " is expected", e.line, e.col);
        return std::nullopt;
      }
      if (!hooks || !hooks->litType)
        return err("RTT-Sub", "runtime value outside runtime checking", e.line, e.col);
      auto t = hooks->litType(v);
      if (!t) return err("RTT-Sub", "dangling reference " + v.str(), e.line, e.col);
      if (!subtype(p, *t, expected))
        return err("RTT-Sub", v.str() + " has type " + t->str() + ", expected " + expected.str(),
                   e.line, e.col);
      return std::nullopt;
    }
  }
  return err("T-Var", "unknown expression", e.line, e.col);
}

// ---------------------------------------------------------------------------
// Statements
// ---------------------------------------------------------------------------

namespace {

// branch effects intersect over the base context: a variable retyped in only
// one branch reverts to its binding in gamma
Ctx mergeBranchEffects(const Program& p, const Ctx& gamma, const Ctx& d1, const Ctx& d2) {
  Ctx g1 = compose(gamma, d1);
  Ctx g2 = compose(gamma, d2);
  Ctx full = intersect(p, g1, g2);
  Ctx out;
  for (const auto& [k, v] : d1)
    if (full.count(k)) out[k] = full.at(k);
  for (const auto& [k, v] : d2)
    if (full.count(k)) out[k] = full.at(k);
  return out;
}

struct StmtChecker {
  const Program& p;
  const std::set<std::string>& locals;
  const RtHooks* hooks;

  std::optional<Diag> run(const Ctx& gamma0, const std::vector<StmtPtr>& body, Ctx& effect) {
    Ctx acc;  // accumulated effect
    for (const auto& sp : body) {
      Ctx g = compose(gamma0, acc);
      Ctx delta;
      if (auto d = one(g, *sp, delta)) return d;
      acc = compose(acc, delta);
    }
    effect = std::move(acc);
    return std::nullopt;
  }

  std::optional<Diag> one(const Ctx& g, const Stmt& s, Ctx& delta) {
    switch (s.kind) {
      case StmtKind::Skip:
      case StmtKind::ScopeEnd:
        return std::nullopt;
      case StmtKind::Assign: {
        auto t = varType(g, s.var);
        if (!t || s.var == "this")
          return err("T-Assign", "cannot assign to '" + s.var + "'", s.line, s.col);
        return checkExpr(p, g, s.expr, *t, hooks);
      }
      case StmtKind::If: {
        auto t = varType(g, s.var);
        if (!t || t->kind != TypeKind::Bool)
          return err("T-Conditional", "condition '" + s.var + "' is not Bool", s.line, s.col);
        Ctx d1, d2;
        if (auto d = run(g, s.body1, d1)) return d;
        if (auto d = run(g, s.body2, d2)) return d;
        delta = mergeBranchEffects(p, g, d1, d2);
        return std::nullopt;
      }
      case StmtKind::While: {
        auto t = varType(g, s.var);
        if (!t || t->kind != TypeKind::Bool)
          return err("T-While", "condition '" + s.var + "' is not Bool", s.line, s.col);
        Ctx d1;
        if (auto d = run(g, s.body1, d1)) return d;
        // the loop may run zero times; the body effect is discarded
        return std::nullopt;
      }
      case StmtKind::Joins: {
        if (!locals.count(s.var2))
          return err("LocalRequired", "join target '" + s.var2 + "' must be a local variable", s.line,
                     s.col);
        auto ty = varType(g, s.var2);
        if (!ty || ty->kind != TypeKind::Group)
          return err("T-Join", "join target '" + s.var2 + "' is not group-typed", s.line, s.col);
        auto tx = varType(g, s.var);
        if (!tx) return err("T-Join", "unbound variable '" + s.var + "'", s.line, s.col);
        for (const auto& i : s.ifaces)
          if (!subtype(p, *tx, Type::iface(i)))
            return err("T-Join", "'" + s.var + "' has type " + tx->str() + ", not a subtype of " + i,
                       s.line, s.col);
        std::set<std::string> su = ty->ifaces;
        su.insert(s.ifaces.begin(), s.ifaces.end());
        delta[s.var2] = Type::group(std::move(su));
        return std::nullopt;
      }
      case StmtKind::Leaves: {
        auto tx = varType(g, s.var);
        if (!tx) return err("T-Leave", "unbound variable '" + s.var + "'", s.line, s.col);
        for (const auto& i : s.ifaces)
          if (!subtype(p, *tx, Type::iface(i)))
            return err("T-Leave", "'" + s.var + "' has type " + tx->str() + ", not a subtype of " + i,
                       s.line, s.col);
        auto ty = varType(g, s.var2);
        if (!ty || ty->kind != TypeKind::Group)
          return err("T-Leave", "leave target '" + s.var2 + "' is not group-typed", s.line, s.col);
        Ctx d1, d2;
        if (auto d = run(g, s.body1, d1)) return d;
        if (auto d = run(g, s.body2, d2)) return d;
        delta = mergeBranchEffects(p, g, d1, d2);
        return std::nullopt;
      }
      case StmtKind::SubtypeOf: {
        auto tx = varType(g, s.var);
        if (!tx || tx->kind != TypeKind::Group)
          return err("T-Inspect", "query target '" + s.var + "' is not group-typed", s.line, s.col);
        if (g.count(s.var2))
          return err("T-Inspect", "query variable '" + s.var2 + "' shadows an existing binding", s.line,
                     s.col);
        std::set<std::string> su = tx->ifaces;
        su.insert(s.ifaces[0]);
        Ctx g1 = g;
        g1[s.var2] = Type::group(std::move(su));
        Ctx d1, d2;
        if (auto d = run(g1, s.body1, d1)) return d;
        d1.erase(s.var2);  // the introduced variable leaves scope with the branch
        if (auto d = run(g, s.body2, d2)) return d;
        delta = mergeBranchEffects(p, g, d1, d2);
        return std::nullopt;
      }
    }
    return err("T-Var", "unknown statement", s.line, s.col);
  }
};

}  // namespace

std::optional<Diag> checkStmts(const Program& p, const Ctx& gamma,
                               const std::vector<StmtPtr>& body,
                               const std::set<std::string>& locals, Ctx& effect,
                               const RtHooks* hooks) {
  StmtChecker c{p, locals, hooks};
  return c.run(gamma, body, effect);
}

// ---------------------------------------------------------------------------
// Methods, classes, programs
// ---------------------------------------------------------------------------

namespace {

std::optional<Diag> checkMethod(const Program& p, const Ctx& classCtx, const Method& m) {
  Ctx g = classCtx;
  std::set<std::string> locals;
  for (const auto& pr : m.sig.params) {
    g[pr.name] = pr.type;
    locals.insert(pr.name);
  }
  for (const auto& l : m.locals) {
    g[l.name] = l.type;
    locals.insert(l.name);
  }
  Ctx delta;
  if (auto d = checkStmts(p, g, m.body, locals, delta)) return d;
  Ctx gd = compose(g, delta);
  auto rt = gd.find(m.returnVar);
  if (rt == gd.end())
    return Diag{"T-Return", "returned variable '" + m.returnVar + "' is unbound", m.line, m.col};
  if (!subtype(p, rt->second, m.sig.ret))
    return Diag{"T-Return", "returned variable '" + m.returnVar + "' has type " + rt->second.str() +
                                ", expected " + m.sig.ret.str(),
                m.line, m.col};
  return std::nullopt;
}

}  // namespace

std::vector<Diag> checkProgram(const Program& p) {
  std::vector<Diag> out;
  for (const auto& c : p.classes) {
    Ctx classCtx;
    classCtx["this"] = Type::cls(c.name);
    for (const auto& f : c.fields) classCtx[f.name] = f.type;

    // every method of every implemented interface must be defined with an
    // identical signature
    for (const auto& i : c.implements) {
      auto sigs = mtd(p, Type::iface(i));
      if (!sigs) continue;  // reported by finalize
      for (const auto& sg : *sigs) {
        bool found = false;
        for (const auto& m : c.methods)
          if (m.sig.shapeKey() == sg.shapeKey()) {
            found = true;
            break;
          }
        if (!found)
          out.push_back({"T-Class", "class '" + c.name + "' does not provide '" + sg.name +
                                        "' required by interface '" + i + "'",
                         c.line, c.col});
      }
    }

    for (const auto& m : c.methods)
      if (auto d = checkMethod(p, classCtx, m)) out.push_back(*d);

    // init block: class parameters are in scope alongside fields
    Ctx g = classCtx;
    std::set<std::string> locals;
    for (const auto& pr : c.ctorParams) g[pr.name] = pr.type;
    for (const auto& l : c.init.locals) {
      g[l.name] = l.type;
      locals.insert(l.name);
    }
    Ctx delta;
    if (auto d = checkStmts(p, g, c.init.body, locals, delta)) out.push_back(*d);
  }

  Ctx g;
  std::set<std::string> locals;
  for (const auto& l : p.mainBlock.locals) {
    g[l.name] = l.type;
    locals.insert(l.name);
  }
  Ctx delta;
  if (auto d = checkStmts(p, g, p.mainBlock.body, locals, delta)) out.push_back(*d);
  return out;
}

}  // namespace kog
