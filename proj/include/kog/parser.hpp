#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "kog/ast.hpp"

namespace kog {

enum class TokKind { Keyword, Ident, Punct, End };

struct Token {
  TokKind kind = TokKind::End;
  std::string lexeme;
  int line = 1, col = 1;
};

struct ParseError {
  std::string message;
  std::vector<std::string> expected;
  int line = 1, col = 1;
  std::string str() const;
};

// nullopt on lexical error (reported via err)
std::optional<std::vector<Token>> lex(const std::string& src, ParseError& err);

// parses one program per source text; duplicate-name and cycle diagnostics are
// left to finalize()
std::variant<Program, ParseError> parse(const std::string& src);

}  // namespace kog
