#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace skylite {

enum class AstKind {
  kColumn,
  kLiteral,
  kUnary,
  kBinary,
  kBetween,
  kIn,
  kIsNull,
  kCase,
  kCall,
  kInterval,
};

enum class LiteralKind { kInteger, kDecimal, kString, kDate, kNull, kBool };

// Untyped expression tree, structurally faithful to the query text.
struct AstExpr {
  AstKind kind = AstKind::kLiteral;
  // kColumn: optional qualifier and column name. kCall: function name.
  std::string table;
  std::string name;
  // kUnary: "-" or "not". kBinary: arithmetic, comparison, "and", "or".
  std::string op;
  // kLiteral: kind and source text (strings unescaped, dates as YYYY-MM-DD). kInterval: count and unit.
  LiteralKind literal_kind = LiteralKind::kNull;
  std::string text;
  std::string unit;
  // kBetween / kIn / kIsNull: "not" form.
  bool negated = false;
  // kCall: count(*).
  bool star = false;
  // kCase: whether the last child is the else branch.
  bool has_else = false;
  // kUnary/kBinary operands; kBetween (value, low, high); kIn (value, items...); kIsNull (value);
  // kCase (when, then, ..., [else]); kCall arguments.
  std::vector<AstExpr> children;

  bool operator==(const AstExpr& other) const;
};

struct TableRef {
  std::string name;
  std::string alias;

  bool operator==(const TableRef&) const = default;
};

struct FromItem {
  TableRef table;
  // Set for "JOIN ... ON"; comma-separated tables have none.
  std::optional<AstExpr> join_condition;

  bool operator==(const FromItem&) const = default;
};

struct SelectItem {
  bool star = false;
  AstExpr expr;
  std::string alias;

  bool operator==(const SelectItem&) const = default;
};

struct OrderItem {
  AstExpr expr;
  bool descending = false;

  bool operator==(const OrderItem&) const = default;
};

struct SelectStatement {
  std::vector<SelectItem> select;
  std::vector<FromItem> from;
  std::optional<AstExpr> where;
  std::vector<AstExpr> group_by;
  std::vector<OrderItem> order_by;
  std::optional<int64_t> limit;

  bool operator==(const SelectStatement&) const = default;
};

// Prints SQL that parses back to a structurally identical tree; operators are fully parenthesized.
std::string ToSql(const AstExpr& expr);
std::string ToSql(const SelectStatement& statement);

}  // namespace skylite
