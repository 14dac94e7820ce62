#pragma once

// Independent oracles used to pin expected values in tests: a random acyclic
// interface-hierarchy generator, a graph-reachability subtype oracle, and a
// brute-force intf-closure oracle. These deliberately avoid the library's own
// subtype machinery.

#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "kog/ast.hpp"
#include "kog/runtime.hpp"

namespace oracles {

// n interfaces I0..I(n-1); extends edges only point to higher indices, so the
// hierarchy is acyclic by construction
inline kog::Program randomHierarchy(std::mt19937_64& rng, int n, double edgeProb = 0.4) {
  kog::Program p;
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  for (int i = 0; i < n; ++i) {
    kog::InterfaceDecl d;
    d.name = "I" + std::to_string(i);
    for (int j = i + 1; j < n; ++j)
      if (coin(rng) < edgeProb) d.extends.insert("I" + std::to_string(j));
    p.interfaces.push_back(std::move(d));
  }
  auto diags = kog::finalize(p);
  if (!diags.empty()) throw std::runtime_error("hierarchy generator produced diagnostics");
  return p;
}

// reflexive-transitive reachability over the declared extends edges, with
// every interface below Any
inline bool reachLe(const kog::Program& p, const std::string& a, const std::string& b) {
  if (b == "Any") return true;
  if (a == "Any") return false;
  if (a == b) return true;
  std::set<std::string> seen{a};
  std::vector<std::string> work{a};
  while (!work.empty()) {
    std::string cur = work.back();
    work.pop_back();
    const kog::InterfaceDecl* d = p.iface(cur);
    if (!d) continue;
    for (const auto& e : d->extends) {
      if (e == b) return true;
      if (seen.insert(e).second) work.push_back(e);
    }
  }
  return false;
}

inline bool reachLt(const kog::Program& p, const std::string& a, const std::string& b) {
  return a != b && reachLe(p, a, b);
}

// brute-force intf closure: delete every interface that has a strict subtype
// present among the exported interface names
inline std::set<std::string> intfOracle(const kog::Program& p,
                                        const std::set<kog::ExportEntry>& exports) {
  std::set<std::string> names;
  for (const auto& [v, i] : exports) names.insert(i);
  std::set<std::string> out;
  for (const auto& i : names) {
    bool hasStrictSub = false;
    for (const auto& j : names)
      if (reachLt(p, j, i)) {
        hasStrictSub = true;
        break;
      }
    if (!hasStrictSub) out.insert(i);
  }
  return out;
}

// the forall-exists group subtype definition, evaluated against reachability
inline bool groupLeOracle(const kog::Program& p, const std::set<std::string>& s,
                          const std::set<std::string>& t) {
  for (const auto& j : t) {
    bool covered = false;
    for (const auto& i : s)
      if (reachLe(p, i, j)) {
        covered = true;
        break;
      }
    if (!covered) return false;
  }
  return true;
}

inline std::string pickIface(std::mt19937_64& rng, int n, bool allowAny = true) {
  int k = static_cast<int>(rng() % static_cast<uint64_t>(n + (allowAny ? 1 : 0)));
  if (allowAny && k == n) return "Any";
  return "I" + std::to_string(k);
}

inline std::set<kog::ExportEntry> randomExports(std::mt19937_64& rng, int nIfaces,
                                                int maxEntries) {
  std::set<kog::ExportEntry> out;
  int k = static_cast<int>(rng() % static_cast<uint64_t>(maxEntries + 1));
  for (int i = 0; i < k; ++i) {
    kog::Value v = kog::Value::obj(static_cast<uint32_t>(1 + rng() % 4));
    out.insert({v, pickIface(rng, nIfaces)});
  }
  return out;
}

}  // namespace oracles
