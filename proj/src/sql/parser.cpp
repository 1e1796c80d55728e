#include "skylite/sql/parser.hpp"

#include <set>

#include <json.hpp>

#include "skylite/common/errors.hpp"
#include "skylite/common/types.hpp"
#include "skylite/sql/lexer.hpp"

namespace skylite {

namespace {

const std::set<std::string>& ReservedWords() {
  static const std::set<std::string> kWords = {
      "select", "from", "where",    "group", "by",   "order", "limit", "as",       "and",   "or",
      "not",    "between", "in",    "is",    "null", "case",  "when",  "then",     "else",  "end",
      "join",   "inner", "on",      "asc",   "desc", "date",  "interval", "true",  "false", "having",
      "distinct", "union", "exists", "left", "right", "outer", "full",  "cross"};
  return kWords;
}

const std::set<std::string>& IntervalUnits() {
  static const std::set<std::string> kUnits = {"day", "month", "year"};
  return kUnits;
}

class Parser {
 public:
  explicit Parser(std::string_view sql) : tokens_(Tokenize(sql)) {}

  SelectStatement ParseStatement() {
    ExpectKeyword("select");
    SelectStatement statement;
    if (IsKeyword("distinct")) NotSupported("select distinct");
    do {
      statement.select.push_back(ParseSelectItem());
    } while (AcceptSymbol(","));
    if (AcceptKeyword("from")) ParseFrom(statement);
    if (AcceptKeyword("where")) statement.where = ParseExpr();
    if (AcceptKeyword("group")) {
      ExpectKeyword("by");
      do {
        statement.group_by.push_back(ParseExpr());
      } while (AcceptSymbol(","));
    }
    if (IsKeyword("having")) NotSupported("having");
    if (AcceptKeyword("order")) {
      ExpectKeyword("by");
      do {
        OrderItem item{ParseExpr(), false};
        if (AcceptKeyword("desc")) {
          item.descending = true;
        } else {
          AcceptKeyword("asc");
        }
        statement.order_by.push_back(std::move(item));
      } while (AcceptSymbol(","));
    }
    if (AcceptKeyword("limit")) {
      const auto& token = Peek();
      if (token.kind != TokenKind::kInteger) Error("expected integer after limit");
      statement.limit = std::stoll(token.text);
      Advance();
    }
    if (IsKeyword("union")) NotSupported("union");
    AcceptSymbol(";");
    if (Peek().kind != TokenKind::kEnd) Error("unexpected '" + Peek().text + "'");
    return statement;
  }

 private:
  const Token& Peek(size_t ahead = 0) const { return tokens_[std::min(position_ + ahead, tokens_.size() - 1)]; }
  const Token& Advance() { return tokens_[position_ < tokens_.size() - 1 ? position_++ : position_]; }

  bool IsKeyword(std::string_view word, size_t ahead = 0) const {
    return Peek(ahead).kind == TokenKind::kIdentifier && Peek(ahead).text == word;
  }
  bool IsSymbol(std::string_view symbol, size_t ahead = 0) const {
    return Peek(ahead).kind == TokenKind::kSymbol && Peek(ahead).text == symbol;
  }
  bool AcceptKeyword(std::string_view word) {
    if (!IsKeyword(word)) return false;
    Advance();
    return true;
  }
  bool AcceptSymbol(std::string_view symbol) {
    if (!IsSymbol(symbol)) return false;
    Advance();
    return true;
  }
  void ExpectKeyword(std::string_view word) {
    if (!AcceptKeyword(word)) Error("expected '" + std::string(word) + "'");
  }
  void ExpectSymbol(std::string_view symbol) {
    if (!AcceptSymbol(symbol)) Error("expected '" + std::string(symbol) + "'");
  }

  [[noreturn]] void Error(const std::string& message) const {
    const auto& token = Peek();
    const std::string found = token.kind == TokenKind::kEnd ? "end of input" : "'" + token.text + "'";
    throw SkyliteError(ErrorCode::kSyntaxError,
                       message + ", found " + found, token.offset);
  }
  [[noreturn]] void NotSupported(const std::string& what) const {
    throw SkyliteError(ErrorCode::kNotSupported,
                       what + " is not supported", Peek().offset);
  }

  std::string ExpectIdentifier(const std::string& what) {
    const auto& token = Peek();
    if (token.kind != TokenKind::kIdentifier || ReservedWords().count(token.text)) Error("expected " + what);
    return Advance().text;
  }

  std::string OptionalAlias() {
    if (AcceptKeyword("as")) return ExpectIdentifier("alias");
    if (Peek().kind == TokenKind::kIdentifier && !ReservedWords().count(Peek().text)) return Advance().text;
    return "";
  }

  SelectItem ParseSelectItem() {
    SelectItem item;
    if (AcceptSymbol("*")) {
      item.star = true;
      return item;
    }
    item.expr = ParseExpr();
    item.alias = OptionalAlias();
    return item;
  }

  TableRef ParseTableRef() {
    if (IsSymbol("(")) NotSupported("subquery in from");
    TableRef table;
    table.name = ExpectIdentifier("table name");
    table.alias = OptionalAlias();
    return table;
  }

  void ParseFrom(SelectStatement& statement) {
    statement.from.push_back({ParseTableRef(), std::nullopt});
    for (;;) {
      if (AcceptSymbol(",")) {
        statement.from.push_back({ParseTableRef(), std::nullopt});
        continue;
      }
      if (IsKeyword("left") || IsKeyword("right") || IsKeyword("full") || IsKeyword("outer") ||
          IsKeyword("cross")) {
        NotSupported("outer and cross join syntax");
      }
      const bool inner = AcceptKeyword("inner");
      if (AcceptKeyword("join")) {
        FromItem item{ParseTableRef(), std::nullopt};
        ExpectKeyword("on");
        item.join_condition = ParseExpr();
        statement.from.push_back(std::move(item));
        continue;
      }
      if (inner) Error("expected 'join'");
      break;
    }
  }

  static AstExpr MakeBinary(std::string op, AstExpr left, AstExpr right) {
    AstExpr expr;
    expr.kind = AstKind::kBinary;
    expr.op = std::move(op);
    expr.children.push_back(std::move(left));
    expr.children.push_back(std::move(right));
    return expr;
  }

  AstExpr ParseExpr() { return ParseOr(); }

  AstExpr ParseOr() {
    AstExpr left = ParseAnd();
    while (AcceptKeyword("or")) left = MakeBinary("or", std::move(left), ParseAnd());
    return left;
  }

  AstExpr ParseAnd() {
    AstExpr left = ParseNot();
    while (AcceptKeyword("and")) left = MakeBinary("and", std::move(left), ParseNot());
    return left;
  }

  AstExpr ParseNot() {
    if (AcceptKeyword("not")) {
      if (IsKeyword("exists")) NotSupported("exists subquery");
      AstExpr expr;
      expr.kind = AstKind::kUnary;
      expr.op = "not";
      expr.children.push_back(ParseNot());
      return expr;
    }
    if (IsKeyword("exists")) NotSupported("exists subquery");
    return ParsePredicate();
  }

  AstExpr ParsePredicate() {
    AstExpr left = ParseAdditive();
    static const std::set<std::string> kComparisons = {"=", "<>", "<", "<=", ">", ">="};
    if (Peek().kind == TokenKind::kSymbol && kComparisons.count(Peek().text)) {
      std::string op = Advance().text;
      return MakeBinary(std::move(op), std::move(left), ParseAdditive());
    }
    bool negated = false;
    if (IsKeyword("not") && (IsKeyword("between", 1) || IsKeyword("in", 1))) {
      Advance();
      negated = true;
    }
    if (AcceptKeyword("between")) {
      AstExpr expr;
      expr.kind = AstKind::kBetween;
      expr.negated = negated;
      expr.children.push_back(std::move(left));
      expr.children.push_back(ParseAdditive());
      ExpectKeyword("and");
      expr.children.push_back(ParseAdditive());
      return expr;
    }
    if (AcceptKeyword("in")) {
      AstExpr expr;
      expr.kind = AstKind::kIn;
      expr.negated = negated;
      expr.children.push_back(std::move(left));
      ExpectSymbol("(");
      if (IsKeyword("select")) NotSupported("subquery in in-list");
      do {
        expr.children.push_back(ParseAdditive());
      } while (AcceptSymbol(","));
      ExpectSymbol(")");
      return expr;
    }
    if (AcceptKeyword("is")) {
      AstExpr expr;
      expr.kind = AstKind::kIsNull;
      expr.negated = AcceptKeyword("not");
      ExpectKeyword("null");
      expr.children.push_back(std::move(left));
      return expr;
    }
    return left;
  }

  AstExpr ParseAdditive() {
    AstExpr left = ParseMultiplicative();
    while (IsSymbol("+") || IsSymbol("-")) {
      std::string op = Advance().text;
      left = MakeBinary(std::move(op), std::move(left), ParseMultiplicative());
    }
    return left;
  }

  AstExpr ParseMultiplicative() {
    AstExpr left = ParseUnary();
    while (IsSymbol("*") || IsSymbol("/")) {
      std::string op = Advance().text;
      left = MakeBinary(std::move(op), std::move(left), ParseUnary());
    }
    return left;
  }

  AstExpr ParseUnary() {
    if (AcceptSymbol("-")) {
      AstExpr expr;
      expr.kind = AstKind::kUnary;
      expr.op = "-";
      expr.children.push_back(ParseUnary());
      return expr;
    }
    if (AcceptSymbol("+")) return ParseUnary();
    return ParsePrimary();
  }

  static AstExpr Literal(LiteralKind kind, std::string text) {
    AstExpr expr;
    expr.kind = AstKind::kLiteral;
    expr.literal_kind = kind;
    expr.text = std::move(text);
    return expr;
  }

  AstExpr ParsePrimary() {
    const Token& token = Peek();
    switch (token.kind) {
      case TokenKind::kInteger:
        return Literal(LiteralKind::kInteger, Advance().text);
      case TokenKind::kDecimal:
        return Literal(LiteralKind::kDecimal, Advance().text);
      case TokenKind::kString:
        return Literal(LiteralKind::kString, Advance().text);
      case TokenKind::kSymbol:
        if (AcceptSymbol("(")) {
          if (IsKeyword("select")) NotSupported("subquery");
          AstExpr inner = ParseExpr();
          ExpectSymbol(")");
          return inner;
        }
        Error("expected expression");
      case TokenKind::kEnd:
        Error("expected expression");
      case TokenKind::kIdentifier:
        break;
    }
    if (AcceptKeyword("null")) return Literal(LiteralKind::kNull, "null");
    if (IsKeyword("true") || IsKeyword("false")) return Literal(LiteralKind::kBool, Advance().text);
    if (IsKeyword("date") && Peek(1).kind == TokenKind::kString) {
      Advance();
      const Token& text = Advance();
      try {
        return Literal(LiteralKind::kDate, dates::Format(dates::Parse(text.text)));
      } catch (const SkyliteError&) {
        throw SkyliteError(ErrorCode::kSyntaxError,
                           "invalid date literal '" + text.text + "'",
                           text.offset);
      }
    }
    if (AcceptKeyword("interval")) return ParseInterval();
    if (AcceptKeyword("case")) return ParseCase();
    if (ReservedWords().count(token.text)) Error("expected expression");

    std::string name = Advance().text;
    if (AcceptSymbol("(")) {
      AstExpr call;
      call.kind = AstKind::kCall;
      call.name = std::move(name);
      if (AcceptSymbol("*")) {
        call.star = true;
      } else if (!IsSymbol(")")) {
        if (IsKeyword("distinct")) NotSupported("distinct aggregates");
        do {
          call.children.push_back(ParseExpr());
        } while (AcceptSymbol(","));
      }
      ExpectSymbol(")");
      return call;
    }
    AstExpr column;
    column.kind = AstKind::kColumn;
    if (AcceptSymbol(".")) {
      column.table = std::move(name);
      column.name = ExpectIdentifier("column name");
    } else {
      column.name = std::move(name);
    }
    return column;
  }

  AstExpr ParseInterval() {
    const Token& count = Peek();
    if (count.kind != TokenKind::kString) Error("expected quoted interval count");
    AstExpr expr;
    expr.kind = AstKind::kInterval;
    expr.text = Advance().text;
    bool numeric = !expr.text.empty();
    for (const char c : expr.text) numeric = numeric && std::isdigit(static_cast<unsigned char>(c));
    if (!numeric) {
      throw SkyliteError(ErrorCode::kSyntaxError, "invalid interval count",
                         count.offset);
    }
    const Token& unit = Peek();
    if (unit.kind != TokenKind::kIdentifier || !IntervalUnits().count(unit.text)) {
      Error("expected interval unit (day, month, year)");
    }
    expr.unit = Advance().text;
    // Optional leading-field precision, e.g. "interval '90' day (3)".
    if (IsSymbol("(") && Peek(1).kind == TokenKind::kInteger && IsSymbol(")", 2)) {
      Advance();
      Advance();
      Advance();
    }
    return expr;
  }

  AstExpr ParseCase() {
    AstExpr expr;
    expr.kind = AstKind::kCase;
    if (!IsKeyword("when")) Error("expected 'when' (simple case is not supported)");
    while (AcceptKeyword("when")) {
      expr.children.push_back(ParseExpr());
      ExpectKeyword("then");
      expr.children.push_back(ParseExpr());
    }
    if (AcceptKeyword("else")) {
      expr.children.push_back(ParseExpr());
      expr.has_else = true;
    }
    ExpectKeyword("end");
    return expr;
  }

  std::vector<Token> tokens_;
  size_t position_ = 0;
};

}  // namespace

SelectStatement Parse(std::string_view sql) { return Parser(sql).ParseStatement(); }

std::string ParseQueryEnvelope(std::string_view json) {
  nlohmann::json request;
  try {
    request = nlohmann::json::parse(json);
  } catch (const nlohmann::json::exception& error) {
    Fail(ErrorCode::kInvalidArgument, std::string("malformed query request: ") + error.what());
  }
  if (!request.is_object() || !request.contains("query") || !request["query"].is_string()) {
    Fail(ErrorCode::kInvalidArgument, "query request must be an object with a string \"query\" field");
  }
  return request["query"].get<std::string>();
}

}  // namespace skylite
