#include "kog/runtime.hpp"

#include <algorithm>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kog/printer.hpp"

namespace kog {

const char* ruleName(Rule r) {
  switch (r) {
    case Rule::Skip: return "Skip";
    case Rule::Assign1: return "Assign1";
    case Rule::Assign2: return "Assign2";
    case Rule::NewGroup: return "New-Group";
    case Rule::Cond1: return "Cond1";
    case Rule::Cond2: return "Cond2";
    case Rule::While: return "While";
    case Rule::Call1: return "Call1";
    case Rule::Call2: return "Call2";
    case Rule::Call3: return "Call3";
    case Rule::Return1: return "Return1";
    case Rule::Return2: return "Return2";
    case Rule::NewObject: return "New-Object";
    case Rule::Join: return "Join";
    case Rule::Acquire: return "Acquire";
    case Rule::Leave1: return "Leave1";
    case Rule::Leave2: return "Leave2";
    case Rule::Query1: return "Query1";
    case Rule::Query2: return "Query2";
  }
  return "?";
}

const char* outcomeName(Outcome o) {
  switch (o) {
    case Outcome::Terminated: return "terminated";
    case Outcome::Stuck: return "stuck";
    case Outcome::ErrorProcess: return "error-process";
    case Outcome::Budget: return "budget-exhausted";
  }
  return "?";
}

Value defaultValue(const Type& t) {
  return t.kind == TypeKind::Bool ? Value::boolean(false) : Value::null();
}

// ---------------------------------------------------------------------------
// Environment access
// ---------------------------------------------------------------------------

namespace {

// a o l: the active process' locals shadow the object attributes
const Slot* lookupSlot(const ObjectState& o, const std::string& x) {
  if (!o.stack.empty()) {
    auto it = o.stack.back().locals.find(x);
    if (it != o.stack.back().locals.end()) return &it->second;
  }
  auto it = o.fields.find(x);
  return it == o.fields.end() ? nullptr : &it->second;
}

std::optional<Value> valueOf(const ObjectState& o, const std::string& x) {
  const Slot* s = lookupSlot(o, x);
  if (!s) return std::nullopt;
  return s->val;
}

std::optional<std::vector<Value>> valuesOf(const ObjectState& o,
                                           const std::vector<std::string>& xs) {
  std::vector<Value> out;
  for (const auto& x : xs) {
    auto v = valueOf(o, x);
    if (!v) return std::nullopt;
    out.push_back(*v);
  }
  return out;
}

// receiver of a call expression: the rewritten constant when present
std::optional<Value> receiverOf(const ObjectState& o, const Expr& e) {
  if (e.target) return *e.target;
  return valueOf(o, e.var);
}

// value of an already-evaluated right-hand side (Var, BoolLit, Lit)
std::optional<Value> evalSimple(const ObjectState& o, const Expr& e) {
  switch (e.kind) {
    case ExprKind::Var: return valueOf(o, e.var);
    case ExprKind::BoolLit: return Value::boolean(e.boolval);
    case ExprKind::Lit: return e.lit;
    default: return std::nullopt;
  }
}

StmtPtr withExpr(const Stmt& s, Expr e) {
  auto n = std::make_shared<Stmt>(s);
  n->expr = std::move(e);
  return n;
}

StmtPtr litAssign(const Stmt& s, Value v) {
  Expr e;
  e.kind = ExprKind::Lit;
  e.lit = v;
  e.line = s.expr.line;
  e.col = s.expr.col;
  return withExpr(s, std::move(e));
}

void replaceFront(Process& pr, std::vector<StmtPtr> stmts) {
  pr.body.erase(pr.body.begin());
  pr.body.insert(pr.body.begin(), stmts.begin(), stmts.end());
}

void setFront(Process& pr, StmtPtr s) { pr.body.front() = std::move(s); }

bool isWaitFor(const Stmt& s, uint32_t obj, const std::string& method) {
  return s.kind == StmtKind::Assign && s.expr.kind == ExprKind::Wait &&
         s.expr.waitObj == obj && s.expr.name == method;
}

// acquire candidates, in deterministic export order
std::set<ExportEntry> acquirePool(const Configuration& cn, const ObjectState& o, const Expr& e) {
  std::set<ExportEntry> pool;
  if (e.var.empty()) {
    for (const auto& [gid, g] : cn.groups) pool.insert(g.exports.begin(), g.exports.end());
  } else {
    auto v = valueOf(o, e.var);
    if (v && v->kind == Value::Kind::Grp) {
      auto it = cn.groups.find(v->id);
      if (it != cn.groups.end()) pool = it->second.exports;
    }
  }
  return pool;
}

std::vector<ExportEntry> acquireMatches(const Program& p, const Configuration& cn,
                                        const ObjectState& o, const Expr& e) {
  std::vector<ExportEntry> out;
  auto excluded = valuesOf(o, e.args);
  if (!excluded) return out;
  for (const auto& [v, j] : acquirePool(cn, o, e)) {
    if (!ifaceLe(p, j, e.name)) continue;
    if (std::find(excluded->begin(), excluded->end(), v) != excluded->end()) continue;
    out.push_back({v, j});
  }
  return out;
}

bool ifaceOffers(const Program& p, const std::string& ifaceName, const std::string& m,
                 size_t arity) {
  auto sigs = mtd(p, Type::iface(ifaceName));
  if (!sigs) return false;
  for (const auto& sg : *sigs)
    if (sg.name == m && sg.params.size() == arity) return true;
  return false;
}

// query candidates: exported entries below the queried interface
bool queryHit(const Program& p, const GroupState& g, const std::string& ifaceName) {
  for (const auto& [v, j] : g.exports)
    if (ifaceLe(p, j, ifaceName)) return true;
  return false;
}

void normalize(Configuration& cn) {
  for (auto& [oid, o] : cn.objects) {
    while (!o.stack.empty()) {
      Process& top = o.stack.back();
      if (top.isError) break;
      if (!top.body.empty() && top.body.front()->kind == StmtKind::ScopeEnd) {
        top.locals.erase(top.body.front()->var);
        top.body.erase(top.body.begin());
        continue;
      }
      if (top.body.empty() && !top.returnVar) {
        o.stack.pop_back();
        continue;
      }
      break;
    }
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

Process bind(const Program& p, const std::string& m, const std::string& cls,
             const std::vector<Value>& args) {
  const Method* mm = p.method(cls, m);
  Process pr;
  pr.method = m;
  if (!mm || mm->sig.params.size() != args.size()) {
    pr.isError = true;
    return pr;
  }
  for (size_t i = 0; i < args.size(); ++i)
    pr.locals[mm->sig.params[i].name] = {mm->sig.params[i].type, args[i]};
  for (const auto& l : mm->locals) pr.locals[l.name] = {l.type, defaultValue(l.type)};
  pr.body = mm->body;
  pr.returnVar = mm->returnVar;
  return pr;
}

Binding atts(const Program& p, const std::string& cls, const std::vector<Value>& args,
             uint32_t self) {
  Binding a;
  const ClassDecl* c = p.cls(cls);
  if (!c) return a;
  for (const auto& f : c->fields) a[f.name] = {f.type, defaultValue(f.type)};
  a["this"] = {Type::cls(cls), Value::obj(self)};
  for (size_t i = 0; i < c->ctorParams.size() && i < args.size(); ++i)
    a[c->ctorParams[i].name] = {c->ctorParams[i].type, args[i]};
  return a;
}

Process initProcess(const Program& p, const std::string& cls) {
  Process pr;
  pr.method = "init";
  const ClassDecl* c = p.cls(cls);
  if (!c) return pr;
  for (const auto& l : c->init.locals) pr.locals[l.name] = {l.type, defaultValue(l.type)};
  pr.body = c->init.body;
  return pr;
}

Configuration initialConfiguration(const Program& p) {
  Configuration cn;
  ObjectState m;
  m.id = 1;
  m.cls = "Main";
  Process pr;
  pr.method = "main";
  for (const auto& l : p.mainBlock.locals) pr.locals[l.name] = {l.type, defaultValue(l.type)};
  pr.body = p.mainBlock.body;
  m.stack.push_back(std::move(pr));
  cn.objects[1] = std::move(m);
  cn.nextObj = 2;
  cn.nextGrp = 1;
  normalize(cn);
  return cn;
}

std::set<std::string> intf(const Program& p, const std::set<ExportEntry>& exports) {
  std::set<std::string> names;
  for (const auto& [v, i] : exports) names.insert(i);
  std::set<std::string> out;
  for (const auto& i : names) {
    bool shadowed = false;
    for (const auto& j : names)
      if (ifaceLt(p, j, i)) {
        shadowed = true;
        break;
      }
    if (!shadowed) out.insert(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Enabled transitions
// ---------------------------------------------------------------------------

namespace {

void enumReturn(const Configuration& cn, uint32_t oid, const ObjectState& o,
                std::vector<Transition>& out) {
  const Process& top = o.stack.back();
  if (!top.returnVar) return;  // normalize pops return-free processes
  if (o.stack.size() >= 2) {
    const Process& below = o.stack[o.stack.size() - 2];
    if (!below.body.empty() && isWaitFor(*below.body.front(), oid, top.method))
      out.push_back({Rule::Return2, oid});
    return;
  }
  for (const auto& [cid, co] : cn.objects) {
    if (cid == oid || co.idle()) continue;
    const Process& cp = co.stack.back();
    if (!cp.body.empty() && isWaitFor(*cp.body.front(), oid, top.method)) {
      Transition t{Rule::Return1, oid};
      t.partnerObj = cid;
      out.push_back(t);
      return;
    }
  }
}

void enumAssign(const Program& p, const Configuration& cn, uint32_t oid, const ObjectState& o,
                const Stmt& st, std::vector<Transition>& out) {
  const Process& pr = o.stack.back();
  bool isLocal = pr.locals.count(st.var) > 0;
  bool isField = o.fields.count(st.var) > 0;
  const Expr& e = st.expr;
  switch (e.kind) {
    case ExprKind::Var:
    case ExprKind::BoolLit:
    case ExprKind::Lit: {
      if (!evalSimple(o, e)) return;  // unbound: surfaced as a runtime fault
      if (isLocal)
        out.push_back({Rule::Assign1, oid});
      else if (isField)
        out.push_back({Rule::Assign2, oid});
      return;
    }
    case ExprKind::NewGroup:
      out.push_back({Rule::NewGroup, oid});
      return;
    case ExprKind::New:
      if (valuesOf(o, e.args)) out.push_back({Rule::NewObject, oid});
      return;
    case ExprKind::Acquire: {
      for (const auto& entry : acquireMatches(p, cn, o, e)) {
        Transition t{Rule::Acquire, oid};
        t.choice = entry;
        if (!e.var.empty()) {
          auto v = valueOf(o, e.var);
          if (v && v->kind == Value::Kind::Grp) t.partnerGrp = v->id;
        }
        out.push_back(t);
      }
      return;
    }
    case ExprKind::Call: {
      auto rv = receiverOf(o, e);
      if (!rv || !valuesOf(o, e.args)) return;
      if (rv->kind == Value::Kind::Obj) {
        if (rv->id == oid) {
          out.push_back({Rule::Call2, oid});
        } else {
          auto it = cn.objects.find(rv->id);
          if (it != cn.objects.end() && it->second.idle()) {
            Transition t{Rule::Call1, oid};
            t.partnerObj = rv->id;
            out.push_back(t);
          }
        }
      } else if (rv->kind == Value::Kind::Grp) {
        auto it = cn.groups.find(rv->id);
        if (it == cn.groups.end()) return;
        for (const auto& entry : it->second.exports) {
          if (!ifaceOffers(p, entry.second, e.name, e.args.size())) continue;
          Transition t{Rule::Call3, oid};
          t.partnerGrp = rv->id;
          t.choice = entry;
          out.push_back(t);
        }
      }
      return;
    }
    case ExprKind::Wait:
      return;  // resolved by the callee's Return1/Return2
  }
}

void enumForObject(const Program& p, const Configuration& cn, uint32_t oid,
                   std::vector<Transition>& out) {
  const ObjectState& o = cn.objects.at(oid);
  if (o.idle()) return;
  const Process& pr = o.stack.back();
  if (pr.isError) return;
  if (pr.body.empty()) {
    enumReturn(cn, oid, o, out);
    return;
  }
  const Stmt& st = *pr.body.front();
  switch (st.kind) {
    case StmtKind::Skip:
      out.push_back({Rule::Skip, oid});
      return;
    case StmtKind::Assign:
      enumAssign(p, cn, oid, o, st, out);
      return;
    case StmtKind::If: {
      auto v = valueOf(o, st.var);
      if (v && v->kind == Value::Kind::Bool)
        out.push_back({v->b ? Rule::Cond1 : Rule::Cond2, oid});
      return;
    }
    case StmtKind::While:
      out.push_back({Rule::While, oid});
      return;
    case StmtKind::Joins: {
      auto xv = valueOf(o, st.var);
      auto yit = pr.locals.find(st.var2);
      if (!xv || yit == pr.locals.end()) return;
      if (yit->second.type.kind != TypeKind::Group ||
          yit->second.val.kind != Value::Kind::Grp)
        return;
      Transition t{Rule::Join, oid};
      t.partnerGrp = yit->second.val.id;
      out.push_back(t);
      return;
    }
    case StmtKind::Leaves: {
      auto xv = valueOf(o, st.var);
      auto yv = valueOf(o, st.var2);
      if (!xv || !yv || yv->kind != Value::Kind::Grp) return;
      auto git = cn.groups.find(yv->id);
      if (git == cn.groups.end()) return;
      std::set<ExportEntry> after = git->second.exports;
      for (const auto& i : st.ifaces) after.erase({*xv, i});
      bool preserved = intf(p, git->second.exports) == intf(p, after);
      Transition t{preserved ? Rule::Leave1 : Rule::Leave2, oid};
      t.partnerGrp = yv->id;
      out.push_back(t);
      return;
    }
    case StmtKind::SubtypeOf: {
      const Slot* xs = lookupSlot(o, st.var);
      if (!xs || xs->type.kind != TypeKind::Group || xs->val.kind != Value::Kind::Grp) return;
      auto git = cn.groups.find(xs->val.id);
      if (git == cn.groups.end()) return;
      bool hit = queryHit(p, git->second, st.ifaces[0]);
      if (hit && lookupSlot(o, st.var2)) return;  // introduced name already bound
      Transition t{hit ? Rule::Query1 : Rule::Query2, oid};
      t.partnerGrp = xs->val.id;
      out.push_back(t);
      return;
    }
    case StmtKind::ScopeEnd:
      return;  // consumed by normalize
  }
}

}  // namespace

std::vector<Transition> enabled(const Program& p, const Configuration& cn) {
  std::vector<Transition> out;
  for (const auto& [oid, o] : cn.objects) enumForObject(p, cn, oid, out);
  return out;
}

// ---------------------------------------------------------------------------
// Application
// ---------------------------------------------------------------------------

namespace {

[[noreturn]] void notEnabled(const Transition& t) {
  throw std::logic_error(std::string("transition not enabled: ") + ruleName(t.rule));
}

}  // namespace

Configuration apply(const Program& p, const Configuration& cn, const Transition& t) {
  Configuration c = cn;
  auto oit = c.objects.find(t.object);
  if (oit == c.objects.end() || oit->second.idle()) notEnabled(t);
  ObjectState& o = oit->second;

  // the two return rules operate on an empty-bodied top process
  if (t.rule == Rule::Return1 || t.rule == Rule::Return2) {
    Process& top = o.stack.back();
    if (!top.body.empty() || !top.returnVar) notEnabled(t);
    auto rv = valueOf(o, *top.returnVar);
    if (!rv) notEnabled(t);
    std::string m = top.method;
    if (t.rule == Rule::Return2) {
      if (o.stack.size() < 2) notEnabled(t);
      o.stack.pop_back();
      Process& below = o.stack.back();
      if (below.body.empty() || !isWaitFor(*below.body.front(), t.object, m)) notEnabled(t);
      setFront(below, litAssign(*below.body.front(), *rv));
    } else {
      if (o.stack.size() != 1 || !t.partnerObj) notEnabled(t);
      o.stack.pop_back();
      auto cit = c.objects.find(*t.partnerObj);
      if (cit == c.objects.end() || cit->second.idle()) notEnabled(t);
      Process& caller = cit->second.stack.back();
      if (caller.body.empty() || !isWaitFor(*caller.body.front(), t.object, m)) notEnabled(t);
      setFront(caller, litAssign(*caller.body.front(), *rv));
    }
    normalize(c);
    return c;
  }

  Process& pr = o.stack.back();
  if (pr.body.empty()) notEnabled(t);
  const Stmt st = *pr.body.front();

  switch (t.rule) {
    case Rule::Skip: {
      if (st.kind != StmtKind::Skip) notEnabled(t);
      replaceFront(pr, {});
      break;
    }
    case Rule::Assign1:
    case Rule::Assign2: {
      if (st.kind != StmtKind::Assign) notEnabled(t);
      auto v = evalSimple(o, st.expr);
      if (!v) notEnabled(t);
      if (t.rule == Rule::Assign1) {
        auto it = pr.locals.find(st.var);
        if (it == pr.locals.end()) notEnabled(t);
        it->second.val = *v;
      } else {
        auto it = o.fields.find(st.var);
        if (it == o.fields.end() || pr.locals.count(st.var)) notEnabled(t);
        it->second.val = *v;
      }
      replaceFront(pr, {});
      break;
    }
    case Rule::NewGroup: {
      if (st.kind != StmtKind::Assign || st.expr.kind != ExprKind::NewGroup) notEnabled(t);
      uint32_t g = c.nextGrp++;
      c.groups[g] = GroupState{g, {}};
      setFront(pr, litAssign(st, Value::grp(g)));
      break;
    }
    case Rule::Cond1:
    case Rule::Cond2: {
      if (st.kind != StmtKind::If) notEnabled(t);
      auto v = valueOf(o, st.var);
      if (!v || v->kind != Value::Kind::Bool || v->b != (t.rule == Rule::Cond1)) notEnabled(t);
      replaceFront(pr, v->b ? st.body1 : st.body2);
      break;
    }
    case Rule::While: {
      if (st.kind != StmtKind::While) notEnabled(t);
      auto unfold = std::make_shared<Stmt>();
      unfold->kind = StmtKind::If;
      unfold->var = st.var;
      unfold->line = st.line;
      unfold->col = st.col;
      unfold->body1 = st.body1;
      unfold->body1.push_back(pr.body.front());
      setFront(pr, std::move(unfold));
      break;
    }
    case Rule::Call1:
    case Rule::Call2: {
      if (st.kind != StmtKind::Assign || st.expr.kind != ExprKind::Call) notEnabled(t);
      auto rv = receiverOf(o, st.expr);
      auto args = valuesOf(o, st.expr.args);
      if (!rv || rv->kind != Value::Kind::Obj || !args) notEnabled(t);
      Expr wait;
      wait.kind = ExprKind::Wait;
      wait.waitObj = rv->id;
      wait.name = st.expr.name;
      wait.line = st.expr.line;
      wait.col = st.expr.col;
      setFront(pr, withExpr(st, std::move(wait)));
      if (t.rule == Rule::Call2) {
        if (rv->id != t.object) notEnabled(t);
        Process callee = kog::bind(p, st.expr.name, o.cls, *args);
        o.stack.push_back(std::move(callee));
      } else {
        auto cit = c.objects.find(rv->id);
        if (rv->id == t.object || cit == c.objects.end() || !cit->second.idle()) notEnabled(t);
        cit->second.stack.push_back(kog::bind(p, st.expr.name, cit->second.cls, *args));
      }
      break;
    }
    case Rule::Call3: {
      if (st.kind != StmtKind::Assign || st.expr.kind != ExprKind::Call || !t.choice)
        notEnabled(t);
      auto rv = receiverOf(o, st.expr);
      if (!rv || rv->kind != Value::Kind::Grp) notEnabled(t);
      auto git = c.groups.find(rv->id);
      if (git == c.groups.end() || !git->second.exports.count(*t.choice)) notEnabled(t);
      Expr e = st.expr;
      e.target = t.choice->first;
      setFront(pr, withExpr(st, std::move(e)));
      break;
    }
    case Rule::NewObject: {
      if (st.kind != StmtKind::Assign || st.expr.kind != ExprKind::New) notEnabled(t);
      auto args = valuesOf(o, st.expr.args);
      if (!args) notEnabled(t);
      uint32_t nid = c.nextObj++;
      ObjectState fresh;
      fresh.id = nid;
      fresh.cls = st.expr.name;
      const ClassDecl* cd = p.cls(st.expr.name);
      if (!cd || cd->ctorParams.size() != args->size()) {
        Process err;
        err.method = "init";
        err.isError = true;
        fresh.stack.push_back(std::move(err));
      } else {
        fresh.fields = atts(p, st.expr.name, *args, nid);
        if (!cd->init.body.empty() || !cd->init.locals.empty())
          fresh.stack.push_back(initProcess(p, st.expr.name));
      }
      setFront(pr, litAssign(st, Value::obj(nid)));
      c.objects[nid] = std::move(fresh);
      break;
    }
    case Rule::Join: {
      if (st.kind != StmtKind::Joins) notEnabled(t);
      auto xv = valueOf(o, st.var);
      auto yit = pr.locals.find(st.var2);
      if (!xv || yit == pr.locals.end() || yit->second.type.kind != TypeKind::Group ||
          yit->second.val.kind != Value::Kind::Grp)
        notEnabled(t);
      auto git = c.groups.find(yit->second.val.id);
      if (git == c.groups.end()) notEnabled(t);
      std::set<std::string> s = yit->second.type.ifaces;
      for (const auto& i : st.ifaces) {
        git->second.exports.insert({*xv, i});
        s.insert(i);
      }
      yit->second.type = Type::group(std::move(s));
      replaceFront(pr, {});
      break;
    }
    case Rule::Acquire: {
      if (st.kind != StmtKind::Assign || st.expr.kind != ExprKind::Acquire || !t.choice)
        notEnabled(t);
      auto ms = acquireMatches(p, c, o, st.expr);
      if (std::find(ms.begin(), ms.end(), *t.choice) == ms.end()) notEnabled(t);
      setFront(pr, litAssign(st, t.choice->first));
      break;
    }
    case Rule::Leave1:
    case Rule::Leave2: {
      if (st.kind != StmtKind::Leaves) notEnabled(t);
      auto xv = valueOf(o, st.var);
      auto yv = valueOf(o, st.var2);
      if (!xv || !yv || yv->kind != Value::Kind::Grp) notEnabled(t);
      auto git = c.groups.find(yv->id);
      if (git == c.groups.end()) notEnabled(t);
      std::set<ExportEntry> after = git->second.exports;
      for (const auto& i : st.ifaces) after.erase({*xv, i});
      bool preserved = intf(p, git->second.exports) == intf(p, after);
      if (preserved != (t.rule == Rule::Leave1)) notEnabled(t);
      if (preserved) {
        git->second.exports = std::move(after);
        replaceFront(pr, st.body1);
      } else {
        replaceFront(pr, st.body2);
      }
      break;
    }
    case Rule::Query1:
    case Rule::Query2: {
      if (st.kind != StmtKind::SubtypeOf) notEnabled(t);
      const Slot* xs = lookupSlot(o, st.var);
      if (!xs || xs->type.kind != TypeKind::Group || xs->val.kind != Value::Kind::Grp)
        notEnabled(t);
      auto git = c.groups.find(xs->val.id);
      if (git == c.groups.end()) notEnabled(t);
      bool hit = queryHit(p, git->second, st.ifaces[0]);
      if (hit != (t.rule == Rule::Query1)) notEnabled(t);
      if (hit) {
        if (lookupSlot(o, st.var2)) notEnabled(t);
        std::set<std::string> s = xs->type.ifaces;
        s.insert(st.ifaces[0]);
        pr.locals[st.var2] = {Type::group(std::move(s)), xs->val};
        auto scopeEnd = std::make_shared<Stmt>();
        scopeEnd->kind = StmtKind::ScopeEnd;
        scopeEnd->var = st.var2;
        std::vector<StmtPtr> seq = st.body1;
        seq.push_back(std::move(scopeEnd));
        replaceFront(pr, std::move(seq));
      } else {
        replaceFront(pr, st.body2);
      }
      break;
    }
    default:
      notEnabled(t);
  }
  normalize(c);
  return c;
}

// ---------------------------------------------------------------------------
// Digest
// ---------------------------------------------------------------------------

namespace {

struct Fnv {
  uint64_t h = 1469598103934665603ull;
  void byte(unsigned char b) {
    h ^= b;
    h *= 1099511628211ull;
  }
  void str(const std::string& s) {
    for (unsigned char ch : s) byte(ch);
    byte(0);
  }
  void num(uint64_t v) {
    for (int i = 0; i < 8; ++i) byte(static_cast<unsigned char>(v >> (i * 8)));
  }
};

void hashStmt(Fnv& f, const Stmt& s) {
  f.num(static_cast<uint64_t>(s.kind));
  f.str(s.var);
  f.str(s.var2);
  for (const auto& i : s.ifaces) f.str(i);
  if (s.kind == StmtKind::Assign) f.str(render(s.expr));
  f.byte(1);
  for (const auto& b : s.body1) hashStmt(f, *b);
  f.byte(2);
  for (const auto& b : s.body2) hashStmt(f, *b);
  f.byte(3);
}

void hashBinding(Fnv& f, const Binding& b) {
  for (const auto& [n, slot] : b) {
    f.str(n);
    f.str(slot.type.str());
    f.str(slot.val.str());
  }
  f.byte(4);
}

}  // namespace

uint64_t digest(const Configuration& cn) {
  Fnv f;
  f.num(cn.nextObj);
  f.num(cn.nextGrp);
  for (const auto& [oid, o] : cn.objects) {
    f.num(oid);
    f.str(o.cls);
    hashBinding(f, o.fields);
    for (const auto& pr : o.stack) {
      f.str(pr.method);
      f.str(pr.returnVar ? *pr.returnVar : "\x01");
      f.byte(pr.isError ? 1 : 0);
      hashBinding(f, pr.locals);
      for (const auto& s : pr.body) hashStmt(f, *s);
      f.byte(5);
    }
    f.byte(6);
  }
  for (const auto& [gid, g] : cn.groups) {
    f.num(gid);
    for (const auto& [v, i] : g.exports) {
      f.str(v.str());
      f.str(i);
    }
    f.byte(7);
  }
  return f.h;
}

std::string describe(const Transition& t) {
  std::string s = std::string(ruleName(t.rule)) + " by o" + std::to_string(t.object);
  if (t.partnerObj) s += " -> o" + std::to_string(*t.partnerObj);
  if (t.partnerGrp) s += " on g" + std::to_string(*t.partnerGrp);
  if (t.choice) s += " choosing (" + t.choice->first.str() + ":" + t.choice->second + ")";
  return s;
}

// ---------------------------------------------------------------------------
// Faults
// ---------------------------------------------------------------------------

namespace {

std::string obj(uint32_t id) { return "object " + std::to_string(id); }

std::optional<std::string> faultFor(const ObjectState& o) {
  for (const auto& pr : o.stack)
    if (pr.isError)
      return obj(o.id) + ": error process for method '" + pr.method + "' on class '" + o.cls + "'";
  if (o.idle()) return std::nullopt;
  const Process& pr = o.stack.back();
  auto unboundIn = [&](const std::vector<std::string>& xs) -> std::optional<std::string> {
    for (const auto& x : xs)
      if (!valueOf(o, x)) return obj(o.id) + ": unbound variable '" + x + "'";
    return std::nullopt;
  };
  if (pr.body.empty()) {
    if (pr.returnVar && !valueOf(o, *pr.returnVar))
      return obj(o.id) + ": unbound return variable '" + *pr.returnVar + "'";
    return std::nullopt;
  }
  const Stmt& st = *pr.body.front();
  auto needGroup = [&](const std::string& x, const std::string& what) -> std::optional<std::string> {
    auto v = valueOf(o, x);
    if (!v) return obj(o.id) + ": unbound variable '" + x + "'";
    if (v->kind != Value::Kind::Grp)
      return obj(o.id) + ": " + what + " '" + x + "' holds " + v->str() + ", not a group";
    return std::nullopt;
  };
  switch (st.kind) {
    case StmtKind::Assign: {
      if (!pr.locals.count(st.var) && !o.fields.count(st.var))
        return obj(o.id) + ": assignment to undeclared variable '" + st.var + "'";
      const Expr& e = st.expr;
      switch (e.kind) {
        case ExprKind::Var:
          return unboundIn({e.var});
        case ExprKind::Call: {
          if (auto d = unboundIn(e.args)) return d;
          auto rv = receiverOf(o, e);
          if (!rv) return obj(o.id) + ": unbound variable '" + e.var + "'";
          if (rv->kind == Value::Kind::Null)
            return obj(o.id) + ": call '" + e.name + "' on null";
          if (rv->kind == Value::Kind::Bool)
            return obj(o.id) + ": call '" + e.name + "' on a boolean";
          return std::nullopt;
        }
        case ExprKind::New:
          return unboundIn(e.args);
        case ExprKind::Acquire: {
          if (auto d = unboundIn(e.args)) return d;
          if (!e.var.empty()) return needGroup(e.var, "acquire source");
          return std::nullopt;
        }
        default:
          return std::nullopt;
      }
    }
    case StmtKind::If:
    case StmtKind::While: {
      auto v = valueOf(o, st.var);
      if (!v) return obj(o.id) + ": unbound variable '" + st.var + "'";
      if (v->kind != Value::Kind::Bool)
        return obj(o.id) + ": condition '" + st.var + "' holds " + v->str() + ", not a boolean";
      return std::nullopt;
    }
    case StmtKind::Joins: {
      if (auto d = unboundIn({st.var})) return d;
      if (auto d = needGroup(st.var2, "join target")) return d;
      auto yit = pr.locals.find(st.var2);
      if (yit == pr.locals.end())
        return obj(o.id) + ": join target '" + st.var2 + "' is not a local variable";
      if (yit->second.type.kind != TypeKind::Group)
        return obj(o.id) + ": join target '" + st.var2 + "' is not group-typed";
      return std::nullopt;
    }
    case StmtKind::Leaves: {
      if (auto d = unboundIn({st.var})) return d;
      return needGroup(st.var2, "leave target");
    }
    case StmtKind::SubtypeOf: {
      if (auto d = needGroup(st.var, "queried variable")) return d;
      const Slot* xs = lookupSlot(o, st.var);
      if (xs->type.kind != TypeKind::Group)
        return obj(o.id) + ": queried variable '" + st.var + "' is not group-typed";
      return std::nullopt;
    }
    default:
      return std::nullopt;
  }
}

}  // namespace

std::optional<std::string> runtimeFault(const Program&, const Configuration& cn) {
  for (const auto& [oid, o] : cn.objects)
    if (auto d = faultFor(o)) return d;
  return std::nullopt;
}

// ---------------------------------------------------------------------------
// Stuck diagnosis
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> diagnoseStuck(const Configuration& cn) {
  std::vector<std::string> out;
  std::map<uint32_t, uint32_t> waitsFor;  // blocked object -> the object it needs
  std::map<uint32_t, std::string> note;
  for (const auto& [oid, o] : cn.objects) {
    if (o.idle()) continue;
    const Process& pr = o.stack.back();
    if (pr.body.empty()) {
      note[oid] = obj(oid) + ": no caller is waiting for '" + pr.method + "' to return";
      continue;
    }
    const Stmt& st = *pr.body.front();
    if (st.kind == StmtKind::Assign && st.expr.kind == ExprKind::Call) {
      auto rv = receiverOf(o, st.expr);
      if (rv && rv->kind == Value::Kind::Obj && rv->id != oid) {
        waitsFor[oid] = rv->id;
        note[oid] = obj(oid) + ": Call1 blocked, callee " + obj(rv->id) + " is busy";
        continue;
      }
      if (rv && rv->kind == Value::Kind::Grp) {
        note[oid] = obj(oid) + ": Call3 no export of group g" + std::to_string(rv->id) +
                    " offers '" + st.expr.name + "'";
        continue;
      }
    }
    if (st.kind == StmtKind::Assign && st.expr.kind == ExprKind::Wait) {
      waitsFor[oid] = st.expr.waitObj;
      note[oid] = obj(oid) + ": waiting for '" + st.expr.name + "' on " + obj(st.expr.waitObj);
      continue;
    }
    if (st.kind == StmtKind::Assign && st.expr.kind == ExprKind::Acquire) {
      std::string where =
          st.expr.var.empty() ? "system-wide" : "in '" + st.expr.var + "'";
      note[oid] = obj(oid) + ": Acquire no-match for interface '" + st.expr.name + "' " + where;
      continue;
    }
    note[oid] = obj(oid) + ": blocked at '" + render(st) + "'";
  }

  // cycles in the wait-for graph (each node has at most one outgoing edge)
  std::set<uint32_t> reported;
  for (const auto& [start, _] : waitsFor) {
    if (reported.count(start)) continue;
    std::vector<uint32_t> path;
    std::set<uint32_t> onPath;
    uint32_t cur = start;
    while (waitsFor.count(cur) && !onPath.count(cur) && !reported.count(cur)) {
      path.push_back(cur);
      onPath.insert(cur);
      cur = waitsFor.at(cur);
    }
    if (onPath.count(cur)) {
      std::string line = "Call1 wait-cycle:";
      bool in = false;
      for (uint32_t n : path) {
        if (n == cur) in = true;
        if (in) line += " o" + std::to_string(n) + " ->";
      }
      line += " o" + std::to_string(cur);
      out.push_back(line);
    }
    reported.insert(path.begin(), path.end());
  }
  for (const auto& [oid, msg] : note) out.push_back(msg);
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

namespace {

std::string describeStep(const Configuration& cn, const Transition& t) {
  const ObjectState& o = cn.objects.at(t.object);
  const Process& pr = o.stack.back();
  if (t.rule == Rule::Return1 || t.rule == Rule::Return2)
    return "return " + (pr.returnVar ? *pr.returnVar : "");
  return render(*pr.body.front());
}

bool allIdle(const Configuration& cn) {
  for (const auto& [oid, o] : cn.objects)
    if (!o.idle()) return false;
  return true;
}

}  // namespace

RunResult run(const Program& p, const RunOptions& opts) {
  RunResult r;
  Configuration cn = initialConfiguration(p);
  std::mt19937_64 rng(opts.seed);
  uint32_t rrLast = 0;
  while (true) {
    if (auto f = runtimeFault(p, cn)) {
      r.outcome = Outcome::ErrorProcess;
      r.diagnosis = {*f};
      break;
    }
    auto ts = enabled(p, cn);
    if (ts.empty()) {
      if (allIdle(cn)) {
        r.outcome = Outcome::Terminated;
      } else {
        r.outcome = Outcome::Stuck;
        r.diagnosis = diagnoseStuck(cn);
      }
      break;
    }
    if (r.steps.size() >= opts.maxSteps) {
      r.outcome = Outcome::Budget;
      break;
    }
    size_t idx = 0;
    if (opts.policy == Policy::Random) {
      idx = static_cast<size_t>(rng() % ts.size());
    } else {
      // round-robin over object ids: the first object after the previous one
      // (cyclically) that has an enabled transition goes next
      uint32_t best = 0;
      bool haveBest = false;
      for (const auto& t : ts) {
        bool after = t.object > rrLast;
        bool bestAfter = haveBest && best > rrLast;
        if (!haveBest || (after && !bestAfter) || (after == bestAfter && t.object < best)) {
          best = t.object;
          haveBest = true;
        }
      }
      for (size_t i = 0; i < ts.size(); ++i)
        if (ts[i].object == best) {
          idx = i;
          break;
        }
      rrLast = best;
    }
    const Transition t = ts[idx];
    Step step;
    step.rule = t.rule;
    step.object = t.object;
    step.partnerObj = t.partnerObj;
    step.partnerGrp = t.partnerGrp;
    step.choice = t.choice;
    step.stmt = describeStep(cn, t);
    cn = apply(p, cn, t);
    step.digestAfter = digest(cn);
    r.ruleCounts[t.rule]++;
    r.steps.push_back(std::move(step));
  }
  r.final_ = cn;
  return r;
}

// ---------------------------------------------------------------------------
// Exploration
// ---------------------------------------------------------------------------

std::vector<Transition> ExploreResult::pathTo(uint64_t d) const {
  std::vector<Transition> out;
  while (d != initialDigest) {
    auto it = parents.find(d);
    if (it == parents.end()) return {};
    out.push_back(it->second.second);
    d = it->second.first;
  }
  std::reverse(out.begin(), out.end());
  return out;
}

ExploreResult explore(const Program& p, const ExploreOptions& opts, const StateCallback& onState,
                      const EdgeCallback& onEdge) {
  ExploreResult r;
  Configuration init = initialConfiguration(p);
  r.initialDigest = digest(init);
  std::deque<std::pair<Configuration, uint64_t>> frontier;
  std::set<uint64_t> seen{r.initialDigest};
  frontier.push_back({std::move(init), 0});
  r.states = 1;
  if (onState) onState(r.initialDigest, frontier.front().first);
  while (!frontier.empty()) {
    auto [cn, depth] = std::move(frontier.front());
    frontier.pop_front();
    uint64_t d = digest(cn);
    if (runtimeFault(p, cn)) {
      r.terminalDigests.push_back(d);
      continue;
    }
    auto ts = enabled(p, cn);
    if (ts.empty()) {
      r.terminalDigests.push_back(d);
      continue;
    }
    if (depth >= opts.depth) {
      r.truncated = true;
      continue;
    }
    for (const auto& t : ts) {
      Configuration next = apply(p, cn, t);
      uint64_t nd = digest(next);
      ++r.transitions;
      r.ruleCounts[t.rule]++;
      if (onEdge) onEdge(cn, t, next);
      if (seen.count(nd)) continue;
      seen.insert(nd);
      r.parents[nd] = {d, t};
      ++r.states;
      if (onState) onState(nd, next);
      if (r.states >= opts.stateBound) {
        r.truncated = true;
        return r;
      }
      frontier.push_back({std::move(next), depth + 1});
    }
  }
  return r;
}

}  // namespace kog
