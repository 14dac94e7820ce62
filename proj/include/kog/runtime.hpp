#pragma once

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "kog/ast.hpp"

namespace kog {

// ---------------------------------------------------------------------------
// Runtime state
// ---------------------------------------------------------------------------

struct Slot {
  Type type;
  Value val;
  auto operator<=>(const Slot&) const = default;
};

using Binding = std::map<std::string, Slot>;

struct Process {
  std::string method;  // "main", "init", or a method name
  Binding locals;
  std::vector<StmtPtr> body;
  std::optional<std::string> returnVar;
  bool isError = false;
};

struct ObjectState {
  uint32_t id = 0;
  std::string cls;
  Binding fields;
  std::vector<Process> stack;  // back() is the active process
  bool idle() const { return stack.empty(); }
};

using ExportEntry = std::pair<Value, std::string>;  // (value, interface)

struct GroupState {
  uint32_t id = 0;
  std::set<ExportEntry> exports;
};

struct Configuration {
  std::map<uint32_t, ObjectState> objects;
  std::map<uint32_t, GroupState> groups;
  uint32_t nextObj = 1, nextGrp = 1;
};

// ---------------------------------------------------------------------------
// Transitions
// ---------------------------------------------------------------------------

enum class Rule {
  Skip, Assign1, Assign2, NewGroup, Cond1, Cond2, While, Call1, Call2, Call3,
  Return1, Return2, NewObject, Join, Acquire, Leave1, Leave2, Query1, Query2
};

constexpr int kRuleCount = 19;
const char* ruleName(Rule r);

struct Transition {
  Rule rule = Rule::Skip;
  uint32_t object = 0;                    // acting object
  std::optional<uint32_t> partnerObj;     // Call1 callee, Return1 caller
  std::optional<uint32_t> partnerGrp;     // the group a rule touches
  std::optional<ExportEntry> choice;      // Acquire / Call3 selection
};

// ---------------------------------------------------------------------------
// Engine
// ---------------------------------------------------------------------------

Value defaultValue(const Type& t);

// process activation for method m of class C; error process when C does not
// define m with the given arity
Process bind(const Program& p, const std::string& m, const std::string& cls,
             const std::vector<Value>& args);

// object state for a freshly created instance of C
Binding atts(const Program& p, const std::string& cls, const std::vector<Value>& args,
             uint32_t self);

Process initProcess(const Program& p, const std::string& cls);

Configuration initialConfiguration(const Program& p);

// interface set of an export set with redundant entries removed (an entry is
// redundant when a strict subtype of it is exported)
std::set<std::string> intf(const Program& p, const std::set<ExportEntry>& exports);

// every rule instance whose premises hold, in deterministic order
std::vector<Transition> enabled(const Program& p, const Configuration& cn);

// applies one enabled transition; throws std::logic_error on a transition
// that is not enabled (engine bug guard)
Configuration apply(const Program& p, const Configuration& cn, const Transition& t);

uint64_t digest(const Configuration& cn);

// one-line rendering of a transition, e.g. "Call1 by o2 -> o3"
std::string describe(const Transition& t);

// non-rule runtime faults: an error process, or null/boolean misuse as a
// call target or group operand
std::optional<std::string> runtimeFault(const Program& p, const Configuration& cn);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

enum class Policy { Random, RoundRobin };
enum class Outcome { Terminated, Stuck, ErrorProcess, Budget };

const char* outcomeName(Outcome o);

struct RunOptions {
  Policy policy = Policy::Random;
  uint64_t seed = 0;
  uint64_t maxSteps = 100000;
};

struct Step {
  Rule rule = Rule::Skip;
  uint32_t object = 0;
  std::optional<uint32_t> partnerObj;
  std::optional<uint32_t> partnerGrp;
  std::optional<ExportEntry> choice;
  std::string stmt;
  uint64_t digestAfter = 0;
};

struct RunResult {
  Outcome outcome = Outcome::Terminated;
  std::vector<Step> steps;
  Configuration final_;
  std::vector<std::string> diagnosis;  // stuck / error details
  std::map<Rule, uint64_t> ruleCounts;
};

RunResult run(const Program& p, const RunOptions& opts);

// ---------------------------------------------------------------------------
// Bounded exhaustive exploration
// ---------------------------------------------------------------------------

struct ExploreOptions {
  uint64_t depth = 500;
  uint64_t stateBound = 1000000;
};

struct Edge {
  uint64_t from = 0, to = 0;
  Transition t;
};

struct ExploreResult {
  uint64_t states = 0;
  uint64_t transitions = 0;
  bool truncated = false;
  std::map<Rule, uint64_t> ruleCounts;
  std::vector<uint64_t> terminalDigests;
  std::map<uint64_t, std::pair<uint64_t, Transition>> parents;  // digest -> (parent, step)
  uint64_t initialDigest = 0;

  std::vector<Transition> pathTo(uint64_t d) const;
};

using StateCallback = std::function<void(uint64_t digest, const Configuration&)>;
using EdgeCallback =
    std::function<void(const Configuration& before, const Transition&, const Configuration& after)>;

ExploreResult explore(const Program& p, const ExploreOptions& opts,
                      const StateCallback& onState = nullptr,
                      const EdgeCallback& onEdge = nullptr);

}  // namespace kog
