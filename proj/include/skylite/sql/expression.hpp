#pragma once

#include <functional>
#include <set>
#include <string>
#include <vector>

#include "skylite/common/types.hpp"
#include "skylite/common/value.hpp"

namespace skylite {

enum class ExprKind { kColumn, kLiteral, kArith, kCompare, kAnd, kOr, kNot, kNegate, kIn, kIsNull, kCase, kCast };
enum class ArithOp { kAdd, kSub, kMul, kDiv };
enum class CompareOp { kEq, kNe, kLt, kLe, kGt, kGe };

std::string_view ArithOpSymbol(ArithOp op);
std::string_view CompareOpSymbol(CompareOp op);
// The operator that holds after swapping the operands (a < b  <=>  b > a).
CompareOp FlipCompare(CompareOp op);

// A bound, typed expression. Columns are referenced by their unique name in the input schema.
//
// Semantics shared by every evaluator:
//  - int64 arithmetic and decimal arithmetic are overflow-checked (InvalidArgument on overflow);
//  - decimal + and - align scales; * adds scales; / always yields float64 and division by zero yields null;
//  - date + int and date - int shift by days;
//  - comparisons and arithmetic with a null operand yield null; and/or use three-valued logic;
//  - case picks the first branch whose condition is true (null counts as false).
struct Expr {
  ExprKind kind = ExprKind::kLiteral;
  DataType type;
  bool nullable = false;
  std::string column;
  Value literal;
  ArithOp arith = ArithOp::kAdd;
  CompareOp compare = CompareOp::kEq;
  // kIn / kIsNull: "not" form.
  bool negated = false;
  // kCase: children are (when, then)... followed by the else branch when set.
  bool has_else = false;
  std::vector<Expr> children;

  static Expr Column(std::string name, DataType type, bool nullable);
  static Expr Literal(Value value);
  static Expr Arith(ArithOp op, Expr left, Expr right, DataType result);
  static Expr Compare(CompareOp op, Expr left, Expr right);
  static Expr And(Expr left, Expr right);
  static Expr Or(Expr left, Expr right);
  static Expr Not(Expr child);
  static Expr Negate(Expr child);
  // children[0] is the probe value.
  static Expr In(Expr value, std::vector<Expr> items, bool negated);
  static Expr IsNull(Expr child, bool negated);
  static Expr Case(std::vector<Expr> children, bool has_else, DataType result);
  static Expr Cast(Expr child, DataType target);

  bool IsConstant() const;
  void CollectColumns(std::set<std::string>& columns) const;
  // Deterministic SQL-like rendering with explicit types for literals and casts.
  std::string ToString() const;
  bool operator==(const Expr& other) const;
};

std::vector<Expr> SplitConjuncts(const Expr& predicate);
// Literal true for an empty list.
Expr MakeConjunction(std::vector<Expr> conjuncts);

// Scalar value semantics.
Value CastValue(const Value& value, const DataType& target);
Value ArithValues(ArithOp op, const Value& left, const Value& right, const DataType& result);
// Null when either side is null; otherwise a bool.
Value CompareValues(CompareOp op, const Value& left, const Value& right);
// Exact three-way comparison of two non-null values of compatible types.
int CompareNonNull(const Value& left, const Value& right);

using ColumnLookup = std::function<Value(const std::string& column)>;
// Row-at-a-time evaluation.
Value EvaluateScalar(const Expr& expr, const ColumnLookup& lookup);

}  // namespace skylite
