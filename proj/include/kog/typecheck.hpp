#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kog/ast.hpp"

namespace kog {

// typing context / effect: finite map from names to types
using Ctx = std::map<std::string, Type>;

// reflexive subtype relation over all types
bool subtype(const Program& p, const Type& a, const Type& b);

// right-biased union: (a o b)(x) = b(x) when x is bound in b
Ctx compose(const Ctx& a, const Ctx& b);

// least common supertype; Any when no unique minimal one exists
Type bestSupertype(const Program& p, const Type& a, const Type& b);

// pointwise bestSupertype over the common domain; group types meet as the
// intersection of their interface sets
Ctx intersect(const Program& p, const Ctx& a, const Ctx& b);

// Hooks that let the runtime checker type the runtime-only expression forms.
// Absent (nullptr) when checking source programs.
struct RtHooks {
  // return type of the method a wait(o,m) lock resolves to
  std::function<std::optional<Type>(uint32_t obj, const std::string& method)> waitType;
  // runtime type of a constant value (object -> class, group -> group type)
  std::function<std::optional<Type>(const Value&)> litType;
};

// checks e against `expected`, subsumption folded into a final subtype check
std::optional<Diag> checkExpr(const Program& p, const Ctx& gamma, const Expr& e,
                              const Type& expected, const RtHooks* hooks = nullptr);

// Checks a statement sequence under gamma. `locals` is the set of variables
// the join rule may retype. On success the accumulated effect is stored in
// `effect`; on failure the first error is returned.
std::optional<Diag> checkStmts(const Program& p, const Ctx& gamma,
                               const std::vector<StmtPtr>& body,
                               const std::set<std::string>& locals, Ctx& effect,
                               const RtHooks* hooks = nullptr);

// whole-program check; assumes finalize() reported no diagnostics.
// Accumulates errors across methods, classes, and the main block.
std::vector<Diag> checkProgram(const Program& p);

}  // namespace kog
