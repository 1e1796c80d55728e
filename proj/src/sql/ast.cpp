#include "skylite/sql/ast.hpp"

namespace skylite {

bool AstExpr::operator==(const AstExpr& other) const {
  return kind == other.kind && table == other.table && name == other.name && op == other.op &&
         literal_kind == other.literal_kind && text == other.text && unit == other.unit && negated == other.negated &&
         star == other.star && has_else == other.has_else && children == other.children;
}

namespace {

std::string Quote(const std::string& text) {
  std::string out = "'";
  for (const char c : text) {
    out += c;
    if (c == '\'') out += '\'';
  }
  return out + "'";
}

}  // namespace

std::string ToSql(const AstExpr& expr) {
  switch (expr.kind) {
    case AstKind::kColumn:
      return expr.table.empty() ? expr.name : expr.table + "." + expr.name;
    case AstKind::kLiteral:
      switch (expr.literal_kind) {
        case LiteralKind::kInteger:
        case LiteralKind::kDecimal:
          return expr.text;
        case LiteralKind::kString:
          return Quote(expr.text);
        case LiteralKind::kDate:
          return "date " + Quote(expr.text);
        case LiteralKind::kNull:
          return "null";
        case LiteralKind::kBool:
          return expr.text;
      }
      return "";
    case AstKind::kUnary:
      return "(" + expr.op + " " + ToSql(expr.children[0]) + ")";
    case AstKind::kBinary:
      return "(" + ToSql(expr.children[0]) + " " + expr.op + " " + ToSql(expr.children[1]) + ")";
    case AstKind::kBetween:
      return "(" + ToSql(expr.children[0]) + (expr.negated ? " not" : "") + " between " + ToSql(expr.children[1]) +
             " and " + ToSql(expr.children[2]) + ")";
    case AstKind::kIn: {
      std::string out = "(" + ToSql(expr.children[0]) + (expr.negated ? " not" : "") + " in (";
      for (size_t i = 1; i < expr.children.size(); ++i) out += (i > 1 ? ", " : "") + ToSql(expr.children[i]);
      return out + "))";
    }
    case AstKind::kIsNull:
      return "(" + ToSql(expr.children[0]) + (expr.negated ? " is not null)" : " is null)");
    case AstKind::kCase: {
      std::string out = "case";
      const size_t pairs = (expr.children.size() - (expr.has_else ? 1 : 0)) / 2;
      for (size_t i = 0; i < pairs; ++i) {
        out += " when " + ToSql(expr.children[2 * i]) + " then " + ToSql(expr.children[2 * i + 1]);
      }
      if (expr.has_else) out += " else " + ToSql(expr.children.back());
      return out + " end";
    }
    case AstKind::kCall: {
      if (expr.star) return expr.name + "(*)";
      std::string out = expr.name + "(";
      for (size_t i = 0; i < expr.children.size(); ++i) out += (i ? ", " : "") + ToSql(expr.children[i]);
      return out + ")";
    }
    case AstKind::kInterval:
      return "interval " + Quote(expr.text) + " " + expr.unit;
  }
  return "";
}

std::string ToSql(const SelectStatement& statement) {
  std::string out = "select ";
  for (size_t i = 0; i < statement.select.size(); ++i) {
    const auto& item = statement.select[i];
    out += i ? ", " : "";
    out += item.star ? "*" : ToSql(item.expr);
    if (!item.alias.empty()) out += " as " + item.alias;
  }
  for (size_t i = 0; i < statement.from.size(); ++i) {
    const auto& item = statement.from[i];
    if (i == 0) {
      out += " from ";
    } else {
      out += item.join_condition ? " join " : ", ";
    }
    out += item.table.name;
    if (!item.table.alias.empty()) out += " as " + item.table.alias;
    if (item.join_condition) out += " on " + ToSql(*item.join_condition);
  }
  if (statement.where) out += " where " + ToSql(*statement.where);
  for (size_t i = 0; i < statement.group_by.size(); ++i) {
    out += (i ? ", " : " group by ") + ToSql(statement.group_by[i]);
  }
  for (size_t i = 0; i < statement.order_by.size(); ++i) {
    out += (i ? ", " : " order by ") + ToSql(statement.order_by[i].expr);
    if (statement.order_by[i].descending) out += " desc";
  }
  if (statement.limit) out += " limit " + std::to_string(*statement.limit);
  return out;
}

}  // namespace skylite
