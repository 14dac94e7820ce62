#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "kog/runtime.hpp"
#include "kog/typecheck.hpp"

namespace kog {

// canonical typing of the heap: every object at its class type, every group at
// the exact set of interfaces currently exported
struct RuntimeEnv {
  std::map<uint32_t, Type> objEnv;
  std::map<uint32_t, Type> grpEnv;
};

RuntimeEnv canonicalEnv(const Program& p, const Configuration& cn);

// All well-typedness obligations of one configuration: exports are inhabited
// at their interfaces (RTT-Exp), every slot is inhabited at its declared type
// (RTT-Sub), every process body re-typechecks and can meet its return
// obligation (RTT-Proc), and no error process exists. Returns one message per
// violation; empty means well-typed.
std::vector<std::string> checkConfig(const Program& p, const Configuration& cn);

struct Violation {
  uint64_t digest = 0;
  std::vector<std::string> messages;
  std::vector<std::string> path;  // transitions from the initial configuration
};

struct RtReport {
  uint64_t statesChecked = 0;
  uint64_t edgesChecked = 0;
  bool truncated = false;
  std::map<Rule, uint64_t> ruleCounts;
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

// Preservation harness: explores the reachable states within the given bounds,
// checks every state with checkConfig, and checks across every transition that
// the canonical environment only grows (new objects and groups may appear,
// object entries never change, group entries only move down the subtype
// order). Collects at most maxViolations witnesses.
RtReport checkReachable(const Program& p, const ExploreOptions& opts,
                        size_t maxViolations = 25);

}  // namespace kog
