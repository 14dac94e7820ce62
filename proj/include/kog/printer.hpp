#pragma once

#include <string>

#include "kog/ast.hpp"

namespace kog {

// surface-syntax rendering; parse(toSource(p)) yields the same normal form
std::string toSource(const Program& p);
std::string toSource(const Type& t);

// compact one-line rendering used in traces and diagnostics
std::string render(const Stmt& s);
std::string render(const Expr& e);

}  // namespace kog
