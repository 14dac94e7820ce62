#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>

#include "kog/ast.hpp"
#include "kog/parser.hpp"

#ifndef KOG_CORPUS_DIR
#define KOG_CORPUS_DIR "corpus"
#endif

namespace testutil {

inline std::string readFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string corpusPath(const std::string& name) {
  return std::string(KOG_CORPUS_DIR) + "/" + name;
}

// parses + finalizes; throws on any error (for known-good corpus programs)
inline kog::Program loadGood(const std::string& name) {
  auto res = kog::parse(readFile(corpusPath(name)));
  if (auto* pe = std::get_if<kog::ParseError>(&res))
    throw std::runtime_error(name + ": " + pe->str());
  kog::Program p = std::move(std::get<kog::Program>(res));
  auto diags = kog::finalize(p);
  if (!diags.empty())
    throw std::runtime_error(name + ": " + diags.front().rule + ": " + diags.front().message);
  return p;
}

// parses source text directly; throws on parse errors, returns finalize diags
inline kog::Program parseSource(const std::string& src, std::vector<kog::Diag>* diags = nullptr) {
  auto res = kog::parse(src);
  if (auto* pe = std::get_if<kog::ParseError>(&res))
    throw std::runtime_error("parse error: " + pe->str());
  kog::Program p = std::move(std::get<kog::Program>(res));
  auto d = kog::finalize(p);
  if (diags)
    *diags = std::move(d);
  else if (!d.empty())
    throw std::runtime_error("finalize: " + d.front().rule + ": " + d.front().message);
  return p;
}

}  // namespace testutil
