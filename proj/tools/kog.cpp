#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "kog/parser.hpp"
#include "kog/printer.hpp"
#include "kog/rtcheck.hpp"
#include "kog/runtime.hpp"
#include "kog/typecheck.hpp"

using json = nlohmann::ordered_json;

namespace {

std::string hex64(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string renderDiag(const std::string& file, const kog::Diag& d) {
  return file + ":" + std::to_string(d.line) + ":" + std::to_string(d.col) + ": " + d.rule +
         ": " + d.message;
}

json diagJson(const kog::Diag& d) {
  return json{{"line", d.line}, {"col", d.col}, {"rule", d.rule}, {"message", d.message}};
}

// 0 on success; 1 after printing parse/well-formedness (and unless `unsafe`,
// type) errors
int loadProgram(const std::string& file, bool unsafe, kog::Program& out,
                std::vector<kog::Diag>& errors) {
  std::ifstream in(file);
  if (!in) {
    std::cerr << file << ": cannot open\n";
    return 1;
  }
  std::stringstream ss;
  ss << in.rdbuf();
  auto res = kog::parse(ss.str());
  if (auto* pe = std::get_if<kog::ParseError>(&res)) {
    std::string msg = pe->message;
    if (!pe->expected.empty()) {
      msg += " (expected ";
      for (size_t i = 0; i < pe->expected.size(); ++i) {
        if (i) msg += ", ";
        msg += pe->expected[i];
      }
      msg += ")";
    }
    errors.push_back({"ParseError", msg, pe->line, pe->col});
    return 1;
  }
  out = std::move(std::get<kog::Program>(res));
  errors = kog::finalize(out);
  if (!errors.empty()) return 1;
  if (!unsafe) {
    errors = kog::checkProgram(out);
    if (!errors.empty()) return 1;
  }
  return 0;
}

void printErrors(const std::string& file, const std::vector<kog::Diag>& errors) {
  for (const auto& d : errors) std::cout << renderDiag(file, d) << "\n";
}

json traceJson(const kog::RunResult& r) {
  json steps = json::array();
  size_t i = 0;
  for (const auto& s : r.steps) {
    json st;
    st["index"] = i++;
    st["rule"] = kog::ruleName(s.rule);
    st["object"] = s.object;
    if (s.partnerObj)
      st["partner"] = "o" + std::to_string(*s.partnerObj);
    else if (s.partnerGrp)
      st["partner"] = "g" + std::to_string(*s.partnerGrp);
    if (s.choice)
      st["choice"] = json{{"value", s.choice->first.str()}, {"interface", s.choice->second}};
    st["stmt"] = s.stmt;
    st["digest-after"] = hex64(s.digestAfter);
    steps.push_back(std::move(st));
  }
  json fin;
  fin["outcome"] = kog::outcomeName(r.outcome);
  fin["steps"] = r.steps.size();
  fin["objects"] = r.final_.objects.size();
  fin["groups"] = r.final_.groups.size();
  return json{{"steps", std::move(steps)}, {"final", std::move(fin)}};
}

// replays the recorded trace, typechecking every visited configuration
std::vector<std::string> verifyTrace(const kog::Program& p, const kog::RunResult& r) {
  std::vector<std::string> out;
  kog::Configuration cn = kog::initialConfiguration(p);
  for (const auto& m : kog::checkConfig(p, cn)) out.push_back("initial state: " + m);
  size_t i = 0;
  for (const auto& s : r.steps) {
    kog::Transition t;
    t.rule = s.rule;
    t.object = s.object;
    t.partnerObj = s.partnerObj;
    t.partnerGrp = s.partnerGrp;
    t.choice = s.choice;
    cn = kog::apply(p, cn, t);
    for (const auto& m : kog::checkConfig(p, cn))
      out.push_back("after step " + std::to_string(i) + ": " + m);
    ++i;
  }
  return out;
}

int outcomeExit(kog::Outcome o) {
  switch (o) {
    case kog::Outcome::Terminated: return 0;
    case kog::Outcome::Stuck: return 2;
    case kog::Outcome::ErrorProcess: return 3;
    case kog::Outcome::Budget: return 4;
  }
  return 1;
}

void writeJson(const std::string& path, const json& j) {
  if (path.empty()) return;
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

std::string intfStr(const kog::Program& p, const kog::GroupState& g) {
  std::string s = "{";
  bool first = true;
  for (const auto& i : kog::intf(p, g.exports)) {
    if (!first) s += ", ";
    s += i;
    first = false;
  }
  return s + "}";
}

std::string exportsStr(const kog::GroupState& g) {
  std::string s = "{";
  bool first = true;
  for (const auto& [v, i] : g.exports) {
    if (!first) s += ", ";
    s += v.str() + ":" + i;
    first = false;
  }
  return s + "}";
}

uint64_t envSeed(uint64_t fallback) {
  const char* e = std::getenv("KOG_SEED");
  if (!e || !*e) return fallback;
  return std::strtoull(e, nullptr, 10);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kog: group-oriented kernel language toolchain"};
  app.require_subcommand(1);

  std::string file, jsonPath;
  uint64_t seed = 0, maxSteps = 100000, depth = 500, stateBound = 1000000;
  std::string policyName = "random";
  bool checkTypes = false, unsafe = false, timing = false;

  auto addCommon = [&](CLI::App* c, bool positional = true) {
    if (positional) c->add_option("file", file, "program file")->required();
    c->add_option("--json", jsonPath, "write machine-readable output to PATH");
  };

  CLI::App* cmdCheck = app.add_subcommand("check", "parse and typecheck a program");
  addCommon(cmdCheck);

  CLI::App* cmdRun = app.add_subcommand("run", "execute a program under a scheduling policy");
  addCommon(cmdRun);
  cmdRun->add_option("--seed", seed, "scheduler seed");
  cmdRun->add_option("--max-steps", maxSteps, "step budget");
  cmdRun->add_option("--policy", policyName, "random | round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  cmdRun->add_flag("--check-types", checkTypes, "typecheck every visited configuration");
  cmdRun->add_flag("--unsafe", unsafe, "skip the static typecheck");
  cmdRun->add_flag("--timing", timing, "report wall-clock time");

  CLI::App* cmdExplore = app.add_subcommand("explore", "bounded exhaustive exploration");
  addCommon(cmdExplore);
  cmdExplore->add_option("--depth", depth, "exploration depth bound");
  cmdExplore->add_option("--state-bound", stateBound, "maximum number of states");
  cmdExplore->add_flag("--check-types", checkTypes, "run the preservation harness");
  cmdExplore->add_flag("--unsafe", unsafe, "skip the static typecheck");
  cmdExplore->add_flag("--timing", timing, "report wall-clock time");

  CLI::App* cmdTrace = app.add_subcommand("trace", "execute and emit the JSON trace");
  addCommon(cmdTrace);
  cmdTrace->add_option("--seed", seed, "scheduler seed");
  cmdTrace->add_option("--max-steps", maxSteps, "step budget");
  cmdTrace->add_option("--policy", policyName, "random | round-robin")
      ->check(CLI::IsMember({"random", "round-robin"}));
  cmdTrace->add_flag("--unsafe", unsafe, "skip the static typecheck");

  CLI11_PARSE(app, argc, argv);

  auto t0 = std::chrono::steady_clock::now();
  auto elapsedMs = [&] {
    return std::chrono::duration_cast<std::chrono::milliseconds>(
               std::chrono::steady_clock::now() - t0)
        .count();
  };

  kog::Program p;
  std::vector<kog::Diag> errors;
  bool skipStatic = unsafe && !cmdCheck->parsed();
  if (loadProgram(file, skipStatic, p, errors)) {
    printErrors(file, errors);
    if (!jsonPath.empty()) {
      json j;
      j["ok"] = false;
      j["errors"] = json::array();
      for (const auto& d : errors) j["errors"].push_back(diagJson(d));
      writeJson(jsonPath, j);
    }
    return 1;
  }

  if (cmdCheck->parsed()) {
    std::cout << "ok\n";
    if (!jsonPath.empty()) writeJson(jsonPath, json{{"ok", true}, {"errors", json::array()}});
    return 0;
  }

  if (cmdExplore->parsed()) {
    kog::ExploreOptions opts{depth, stateBound};
    json j;
    int rc = 0;
    if (checkTypes) {
      kog::RtReport rep = kog::checkReachable(p, opts);
      std::cout << "states: " << rep.statesChecked << "\n";
      std::cout << "edges: " << rep.edgesChecked << "\n";
      std::cout << "truncated: " << (rep.truncated ? "true" : "false") << "\n";
      std::cout << "violations: " << rep.violations.size() << "\n";
      for (const auto& v : rep.violations) {
        std::cout << "state " << hex64(v.digest) << ":\n";
        for (const auto& m : v.messages) std::cout << "  " << m << "\n";
        for (const auto& s : v.path) std::cout << "    via " << s << "\n";
      }
      j["states"] = rep.statesChecked;
      j["edges"] = rep.edgesChecked;
      j["truncated"] = rep.truncated;
      j["violations"] = json::array();
      for (const auto& v : rep.violations)
        j["violations"].push_back(
            json{{"digest", hex64(v.digest)}, {"messages", v.messages}, {"path", v.path}});
      rc = rep.ok() ? 0 : 1;
    } else {
      kog::ExploreResult res = kog::explore(p, opts);
      std::cout << "states: " << res.states << "\n";
      std::cout << "transitions: " << res.transitions << "\n";
      std::cout << "truncated: " << (res.truncated ? "true" : "false") << "\n";
      std::cout << "terminal states: " << res.terminalDigests.size() << "\n";
      json rules;
      for (const auto& [r, n] : res.ruleCounts) {
        std::cout << "rule " << kog::ruleName(r) << ": " << n << "\n";
        rules[kog::ruleName(r)] = n;
      }
      j["states"] = res.states;
      j["transitions"] = res.transitions;
      j["truncated"] = res.truncated;
      j["terminal-states"] = res.terminalDigests.size();
      j["rules"] = std::move(rules);
    }
    if (timing) std::cout << "time-ms: " << elapsedMs() << "\n";
    writeJson(jsonPath, j);
    return rc;
  }

  // run / trace
  kog::RunOptions opts;
  opts.seed = envSeed(seed);
  opts.maxSteps = maxSteps;
  opts.policy = policyName == "round-robin" ? kog::Policy::RoundRobin : kog::Policy::Random;
  kog::RunResult r = kog::run(p, opts);
  json jt = traceJson(r);

  if (cmdTrace->parsed()) {
    if (jsonPath.empty())
      std::cout << jt.dump(2) << "\n";
    else
      writeJson(jsonPath, jt);
    return outcomeExit(r.outcome);
  }

  std::cout << "outcome: " << kog::outcomeName(r.outcome) << "\n";
  std::cout << "steps: " << r.steps.size() << "\n";
  for (const auto& m : r.diagnosis) std::cout << m << "\n";
  std::cout << "objects: " << r.final_.objects.size() << "\n";
  std::cout << "groups: " << r.final_.groups.size() << "\n";
  for (const auto& [gid, g] : r.final_.groups)
    std::cout << "g" << gid << ": exports=" << exportsStr(g) << " intf=" << intfStr(p, g)
              << "\n";
  if (checkTypes) {
    auto violations = verifyTrace(p, r);
    std::cout << "violations: " << violations.size() << "\n";
    for (const auto& m : violations) std::cout << "  " << m << "\n";
  }
  if (timing) std::cout << "time-ms: " << elapsedMs() << "\n";
  writeJson(jsonPath, jt);
  return outcomeExit(r.outcome);
}
