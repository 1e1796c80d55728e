#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace skylite {

enum class TokenKind { kIdentifier, kInteger, kDecimal, kString, kSymbol, kEnd };

struct Token {
  TokenKind kind = TokenKind::kEnd;
  // Identifiers are lowercased; strings are unescaped; symbols are the operator text.
  std::string text;
  size_t offset = 0;
};

// Splits SQL text into tokens; "--" starts a line comment. Throws SyntaxError with the offending offset.
std::vector<Token> Tokenize(std::string_view sql);

}  // namespace skylite
