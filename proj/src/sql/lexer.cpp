#include "skylite/sql/lexer.hpp"

#include <cctype>

#include "skylite/common/errors.hpp"

namespace skylite {

namespace {

[[noreturn]] void SyntaxError(const std::string& message, size_t offset) {
  throw SkyliteError(ErrorCode::kSyntaxError, message, offset);
}

bool IsIdentifierStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool IsIdentifierChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool IsDigit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::vector<Token> Tokenize(std::string_view sql) {
  std::vector<Token> tokens;
  size_t i = 0;
  while (i < sql.size()) {
    const char c = sql[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '-' && i + 1 < sql.size() && sql[i + 1] == '-') {
      while (i < sql.size() && sql[i] != '\n') ++i;
      continue;
    }
    const size_t start = i;
    if (IsIdentifierStart(c)) {
      std::string text;
      while (i < sql.size() && IsIdentifierChar(sql[i])) {
        text += static_cast<char>(std::tolower(static_cast<unsigned char>(sql[i])));
        ++i;
      }
      tokens.push_back({TokenKind::kIdentifier, std::move(text), start});
    } else if (IsDigit(c) || (c == '.' && i + 1 < sql.size() && IsDigit(sql[i + 1]))) {
      bool decimal = false;
      while (i < sql.size() && (IsDigit(sql[i]) || sql[i] == '.')) {
        if (sql[i] == '.') {
          if (decimal) SyntaxError("malformed number", start);
          decimal = true;
        }
        ++i;
      }
      if (i < sql.size() && IsIdentifierStart(sql[i])) SyntaxError("malformed number", start);
      tokens.push_back({decimal ? TokenKind::kDecimal : TokenKind::kInteger, std::string(sql.substr(start, i - start)),
                        start});
    } else if (c == '\'') {
      std::string text;
      ++i;
      for (;;) {
        if (i >= sql.size()) SyntaxError("unterminated string literal", start);
        if (sql[i] == '\'') {
          if (i + 1 < sql.size() && sql[i + 1] == '\'') {
            text += '\'';
            i += 2;
            continue;
          }
          ++i;
          break;
        }
        text += sql[i++];
      }
      tokens.push_back({TokenKind::kString, std::move(text), start});
    } else {
      static const char* const kTwoCharSymbols[] = {"<=", ">=", "<>", "!="};
      std::string symbol;
      for (const char* candidate : kTwoCharSymbols) {
        if (sql.substr(i, 2) == candidate) symbol = candidate;
      }
      if (symbol.empty()) {
        if (std::string_view("(),.*+-/=<>;").find(c) == std::string_view::npos) {
          SyntaxError(std::string("unexpected character '") + c + "'", start);
        }
        symbol = std::string(1, c);
      }
      if (symbol == "!=") symbol = "<>";
      i += sql.substr(i, 2) == "!=" ? 2 : symbol.size();
      tokens.push_back({TokenKind::kSymbol, std::move(symbol), start});
    }
  }
  tokens.push_back({TokenKind::kEnd, "", sql.size()});
  return tokens;
}

}  // namespace skylite
