#include "kog/rtcheck.hpp"

#include <sstream>

namespace kog {

namespace {

std::set<std::string> exportNames(const GroupState& g) {
  std::set<std::string> s;
  for (const auto& [v, i] : g.exports) s.insert(i);
  return s;
}

std::string classOf(const Configuration& cn, uint32_t oid) {
  auto it = cn.objects.find(oid);
  return it == cn.objects.end() ? "" : it->second.cls;
}

// dynamic inhabitation: does value v live at type t in this configuration?
bool inhabits(const Program& p, const Configuration& cn, const Value& v, const Type& t) {
  switch (v.kind) {
    case Value::Kind::Null:
      return t.isRef();
    case Value::Kind::Bool:
      return t.kind == TypeKind::Bool;
    case Value::Kind::Obj: {
      std::string c = classOf(cn, v.id);
      if (c.empty()) return false;
      return subtype(p, Type::cls(c), t);
    }
    case Value::Kind::Grp: {
      auto it = cn.groups.find(v.id);
      if (it == cn.groups.end()) return false;
      return subtype(p, Type::group(exportNames(it->second)), t);
    }
  }
  return false;
}

std::string where(uint32_t oid) { return "o" + std::to_string(oid); }

void checkBinding(const Program& p, const Configuration& cn, const Binding& b,
                  const std::string& loc, std::vector<std::string>& out) {
  for (const auto& [n, slot] : b)
    if (!inhabits(p, cn, slot.val, slot.type))
      out.push_back("RTT-Sub: " + loc + ": '" + n + "' holds " + slot.val.str() +
                    ", which does not inhabit " + slot.type.str());
}

}  // namespace

RuntimeEnv canonicalEnv(const Program& p, const Configuration& cn) {
  (void)p;
  RuntimeEnv env;
  for (const auto& [oid, o] : cn.objects) env.objEnv[oid] = Type::cls(o.cls);
  for (const auto& [gid, g] : cn.groups) env.grpEnv[gid] = Type::group(exportNames(g));
  return env;
}

std::vector<std::string> checkConfig(const Program& p, const Configuration& cn) {
  std::vector<std::string> out;

  // RTT-Exp: every exported entry is inhabited at its interface
  for (const auto& [gid, g] : cn.groups)
    for (const auto& [v, i] : g.exports)
      if (!inhabits(p, cn, v, Type::iface(i)))
        out.push_back("RTT-Exp: g" + std::to_string(gid) + " exports " + v.str() +
                      " at interface " + i + ", which it does not inhabit");

  RtHooks hooks;
  hooks.waitType = [&](uint32_t oid, const std::string& m) -> std::optional<Type> {
    const Method* mm = p.method(classOf(cn, oid), m);
    if (!mm) return std::nullopt;
    return mm->sig.ret;
  };
  hooks.litType = [&](const Value& v) -> std::optional<Type> {
    if (v.kind == Value::Kind::Obj) {
      std::string c = classOf(cn, v.id);
      if (c.empty()) return std::nullopt;
      return Type::cls(c);
    }
    if (v.kind == Value::Kind::Grp) {
      auto it = cn.groups.find(v.id);
      if (it == cn.groups.end()) return std::nullopt;
      return Type::group(exportNames(it->second));
    }
    return std::nullopt;
  };

  for (const auto& [oid, o] : cn.objects) {
    checkBinding(p, cn, o.fields, where(oid) + " fields", out);
    for (const auto& pr : o.stack) {
      std::string loc = where(oid) + "/" + pr.method;
      if (pr.isError) {
        out.push_back("RTT-Proc: " + loc + ": error process");
        continue;
      }
      checkBinding(p, cn, pr.locals, loc, out);

      // RTT-Proc: the remaining body re-typechecks under the slot types, with
      // the process' own locals as the retypable set
      Ctx gamma;
      for (const auto& [n, s] : o.fields) gamma[n] = s.type;
      std::set<std::string> localSet;
      for (const auto& [n, s] : pr.locals) {
        gamma[n] = s.type;
        localSet.insert(n);
      }
      Ctx effect;
      if (auto d = checkStmts(p, gamma, pr.body, localSet, effect, &hooks)) {
        out.push_back("RTT-Proc: " + loc + ": " + d->rule + ": " + d->message);
        continue;
      }
      // the return obligation must still be satisfiable
      if (pr.returnVar) {
        const Method* mm = p.method(o.cls, pr.method);
        if (!mm) {
          out.push_back("RTT-Proc: " + loc + ": no method declaration for active process");
          continue;
        }
        Ctx gd = compose(gamma, effect);
        auto it = gd.find(*pr.returnVar);
        if (it == gd.end())
          out.push_back("RTT-Proc: " + loc + ": returned variable '" + *pr.returnVar +
                        "' is unbound");
        else if (!subtype(p, it->second, mm->sig.ret))
          out.push_back("RTT-Proc: " + loc + ": returned variable '" + *pr.returnVar +
                        "' has type " + it->second.str() + ", expected " + mm->sig.ret.str());
      }
    }
  }
  return out;
}

RtReport checkReachable(const Program& p, const ExploreOptions& opts, size_t maxViolations) {
  RtReport rep;
  ExploreResult* exp = nullptr;  // filled below; pathTo needs the final result

  std::vector<std::pair<uint64_t, std::vector<std::string>>> pending;
  auto onState = [&](uint64_t d, const Configuration& cn) {
    ++rep.statesChecked;
    if (rep.violations.size() + pending.size() >= maxViolations) return;
    auto msgs = checkConfig(p, cn);
    if (!msgs.empty()) pending.push_back({d, std::move(msgs)});
  };
  auto onEdge = [&](const Configuration& before, const Transition& t,
                    const Configuration& after) {
    ++rep.edgesChecked;
    if (rep.violations.size() + pending.size() >= maxViolations) return;
    RuntimeEnv eb = canonicalEnv(p, before);
    RuntimeEnv ea = canonicalEnv(p, after);
    std::vector<std::string> msgs;
    for (const auto& [oid, ty] : eb.objEnv) {
      auto it = ea.objEnv.find(oid);
      if (it == ea.objEnv.end())
        msgs.push_back("env: object o" + std::to_string(oid) + " disappeared");
      else if (!(it->second == ty))
        msgs.push_back("env: object o" + std::to_string(oid) + " changed type from " + ty.str() +
                       " to " + it->second.str());
    }
    for (const auto& [gid, ty] : eb.grpEnv) {
      auto it = ea.grpEnv.find(gid);
      if (it == ea.grpEnv.end())
        msgs.push_back("env: group g" + std::to_string(gid) + " disappeared");
      else if (!subtype(p, it->second, ty))
        msgs.push_back("env: group g" + std::to_string(gid) + " regressed from " + ty.str() +
                       " to " + it->second.str() + " across " + describe(t));
    }
    if (!msgs.empty()) pending.push_back({digest(after), std::move(msgs)});
  };

  ExploreResult res = explore(p, opts, onState, onEdge);
  exp = &res;
  rep.truncated = res.truncated;
  rep.ruleCounts = res.ruleCounts;

  for (auto& [d, msgs] : pending) {
    Violation v;
    v.digest = d;
    v.messages = std::move(msgs);
    for (const auto& t : exp->pathTo(d)) v.path.push_back(describe(t));
    rep.violations.push_back(std::move(v));
    if (rep.violations.size() >= maxViolations) break;
  }
  return rep;
}

}  // namespace kog
