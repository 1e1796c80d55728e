#include "skylite/execution/operators.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "skylite/common/errors.hpp"
#include "skylite/common/hashing.hpp"
#include "skylite/execution/expression_evaluator.hpp"

namespace skylite {

namespace {

int ScaleOf(const DataType& type) { return type.id == TypeId::kDecimal ? type.scale : 0; }

uint64_t RowHash(const std::vector<Column>& keys, size_t row) {
  uint64_t hash = 0;
  for (const auto& key : keys) hash = key.HashAt(row, hash);
  return hash;
}

bool KeysEqual(const std::vector<Column>& a, size_t a_row, const std::vector<Column>& b, size_t b_row) {
  for (size_t i = 0; i < a.size(); ++i) {
    if (!a[i].EqualAt(a_row, b[i], b_row)) return false;
  }
  return true;
}

bool AnyNull(const std::vector<Column>& keys, size_t row) {
  for (const auto& key : keys) {
    if (key.IsNull(row)) return true;
  }
  return false;
}

std::vector<Column> EvaluateAll(const std::vector<Expr>& exprs, const RecordBatch& batch) {
  std::vector<Column> columns;
  columns.reserve(exprs.size());
  for (const auto& expr : exprs) columns.push_back(EvaluateExpr(expr, batch));
  return columns;
}

bool SumsAsFloat(const AggregateCall& call) {
  return call.arg && call.arg->type.id == TypeId::kFloat64;
}

}  // namespace

void Operator::Finish() {
  if (next_) next_->Finish();
}

void Operator::Emit(const RecordBatch& batch) {
  if (!next_ || batch.NumRows() == 0) return;
  const size_t limit = std::max<size_t>(1, context_.batch_size);
  if (batch.NumRows() <= limit) {
    next_->Push(batch);
    return;
  }
  for (size_t offset = 0; offset < batch.NumRows(); offset += limit) {
    next_->Push(batch.Slice(offset, std::min(limit, batch.NumRows() - offset)));
  }
}

void Operator::CheckBudget(uint64_t bytes, const char* what) const {
  if (context_.memory_budget_bytes > 0 && bytes > context_.memory_budget_bytes) {
    Fail(ErrorCode::kOutOfBudget, std::string(what) + " needs " + std::to_string(bytes) + " bytes, budget is " +
                                      std::to_string(context_.memory_budget_bytes));
  }
}

void AppendBatch(RecordBatch& target, const RecordBatch& source) {
  for (size_t row = 0; row < source.NumRows(); ++row) target.AppendRow(source, row);
}

std::vector<uint32_t> PartitionRows(const RecordBatch& batch, const std::vector<Expr>& keys, int partition_count) {
  std::vector<uint32_t> partitions(batch.NumRows(), 0);
  if (partition_count <= 1) return partitions;
  const auto columns = EvaluateAll(keys, batch);
  for (size_t row = 0; row < batch.NumRows(); ++row) {
    partitions[row] = static_cast<uint32_t>(RowHash(columns, row) % static_cast<uint64_t>(partition_count));
  }
  return partitions;
}

FilterOperator::FilterOperator(OperatorContext& context, Expr predicate)
    : Operator(context), predicate_(std::move(predicate)) {}

void FilterOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  const auto selected = EvaluateFilter(predicate_, batch);
  if (selected.size() == batch.NumRows()) {
    Emit(batch);
  } else if (!selected.empty()) {
    Emit(batch.Take(selected));
  }
}

ProjectOperator::ProjectOperator(OperatorContext& context, std::vector<NamedExpr> projections, Schema output)
    : Operator(context), projections_(std::move(projections)), output_(std::move(output)) {}

void ProjectOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  std::vector<Column> columns;
  for (const auto& projection : projections_) columns.push_back(EvaluateExpr(projection.expr, batch));
  RecordBatch result(output_, std::move(columns));
  if (projections_.empty()) {
    for (size_t row = 0; row < batch.NumRows(); ++row) result.AppendRow(std::vector<Value>{});
  }
  Emit(result);
}

HashAggregateOperator::HashAggregateOperator(OperatorContext& context, AggPhase phase, std::vector<NamedExpr> keys,
                                             std::vector<AggregateCall> aggregates, Schema output)
    : Operator(context),
      phase_(phase),
      keys_(std::move(keys)),
      aggregates_(std::move(aggregates)),
      output_(std::move(output)),
      states_(aggregates_.size()) {
  for (size_t i = 0; i < keys_.size(); ++i) group_keys_.emplace_back(output_.At(i).type);
}

uint32_t HashAggregateOperator::FindOrInsert(const std::vector<Column>& keys, size_t row) {
  auto& bucket = index_[RowHash(keys, row)];
  for (uint32_t group : bucket) {
    if (KeysEqual(group_keys_, group, keys, row)) return group;
  }
  const auto group = static_cast<uint32_t>(groups_++);
  for (size_t i = 0; i < keys.size(); ++i) group_keys_[i].AppendFrom(keys[i], row);
  for (size_t i = 0; i < aggregates_.size(); ++i) {
    auto& state = states_[i];
    state.ints.push_back(0);
    state.floats.push_back(0.0);
    state.counts.push_back(0);
    state.has_value.push_back(0);
    if (aggregates_[i].func == AggFunc::kMin || aggregates_[i].func == AggFunc::kMax) state.extremes.emplace_back();
  }
  bucket.push_back(group);
  return group;
}

void HashAggregateOperator::Accumulate(size_t index, uint32_t group, const RecordBatch& batch,
                                       const std::vector<Column>& inputs, size_t row) {
  const auto& call = aggregates_[index];
  auto& state = states_[index];
  const Column* input = call.func == AggFunc::kCountStar && phase_ == AggPhase::kPartial ? nullptr : &inputs[index];
  switch (call.func) {
    case AggFunc::kCountStar:
    case AggFunc::kCount:
      if (phase_ == AggPhase::kFinal) {
        state.counts[group] += input->Int(row);
      } else if (!input || !input->IsNull(row)) {
        ++state.counts[group];
      }
      return;
    case AggFunc::kSum:
    case AggFunc::kAvg: {
      if (input->IsNull(row)) {
        // Partial avg states carry a count even when the sum is null.
        break;
      }
      if (SumsAsFloat(call)) {
        state.floats[group] += input->Float(row);
      } else {
        state.ints[group] = decimals::CheckedAdd(state.ints[group], input->Int(row));
      }
      state.has_value[group] = 1;
      if (call.func == AggFunc::kAvg && phase_ == AggPhase::kPartial) ++state.counts[group];
      break;
    }
    case AggFunc::kMin:
    case AggFunc::kMax: {
      if (input->IsNull(row)) return;
      Value value = input->GetValue(row);
      auto& best = state.extremes[group];
      const bool better = best.IsNull() || (call.func == AggFunc::kMin ? CompareNonNull(value, best) < 0
                                                                        : CompareNonNull(value, best) > 0);
      if (better) best = std::move(value);
      return;
    }
  }
  if (call.func == AggFunc::kAvg && phase_ == AggPhase::kFinal) {
    const auto& counts = batch.column(batch.GetSchema().IndexOrFail(call.name + "#count"));
    state.counts[group] += counts.Int(row);
  }
}

void HashAggregateOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  std::vector<Column> keys;
  for (const auto& key : keys_) keys.push_back(EvaluateExpr(key.expr, batch));
  std::vector<Column> inputs;
  for (const auto& call : aggregates_) {
    if (phase_ == AggPhase::kPartial) {
      inputs.push_back(call.arg ? EvaluateExpr(*call.arg, batch) : Column(DataType::Int64()));
    } else {
      const std::string state = call.func == AggFunc::kAvg ? call.name + "#sum" : call.name;
      inputs.push_back(batch.column(batch.GetSchema().IndexOrFail(state)));
    }
  }
  for (size_t row = 0; row < batch.NumRows(); ++row) {
    const uint32_t group = keys_.empty() && groups_ > 0 ? 0 : FindOrInsert(keys, row);
    for (size_t i = 0; i < aggregates_.size(); ++i) Accumulate(i, group, batch, inputs, row);
  }
  uint64_t bytes = groups_ * (32 + 40 * aggregates_.size());
  for (const auto& column : group_keys_) bytes += column.ByteSize();
  CheckBudget(bytes, "hash aggregate");
}

RecordBatch HashAggregateOperator::Produce() const {
  std::vector<Column> columns(group_keys_.begin(), group_keys_.end());
  size_t next = keys_.size();
  for (size_t i = 0; i < aggregates_.size(); ++i) {
    const auto& call = aggregates_[i];
    const auto& state = states_[i];
    if (phase_ == AggPhase::kPartial && call.func == AggFunc::kAvg) {
      Column sum(output_.At(next++).type);
      Column count(output_.At(next++).type);
      for (size_t g = 0; g < groups_; ++g) {
        if (!state.has_value[g]) {
          sum.AppendNull();
        } else if (SumsAsFloat(call)) {
          sum.AppendFloat(state.floats[g]);
        } else {
          sum.AppendInt(state.ints[g]);
        }
        count.AppendInt(state.counts[g]);
      }
      columns.push_back(std::move(sum));
      columns.push_back(std::move(count));
      continue;
    }
    Column column(output_.At(next++).type);
    for (size_t g = 0; g < groups_; ++g) {
      switch (call.func) {
        case AggFunc::kCount:
        case AggFunc::kCountStar:
          column.AppendInt(state.counts[g]);
          break;
        case AggFunc::kSum:
          if (!state.has_value[g]) {
            column.AppendNull();
          } else if (SumsAsFloat(call)) {
            column.AppendFloat(state.floats[g]);
          } else {
            column.AppendInt(state.ints[g]);
          }
          break;
        case AggFunc::kMin:
        case AggFunc::kMax:
          column.Append(state.extremes[g]);
          break;
        case AggFunc::kAvg: {
          const int64_t count = state.counts[g];
          if (count == 0 || !state.has_value[g]) {
            column.AppendNull();
          } else if (SumsAsFloat(call)) {
            column.AppendFloat(state.floats[g] / static_cast<double>(count));
          } else {
            const int scale = ScaleOf(call.arg->type);
            const __int128 sum = state.ints[g];
            column.AppendInt(scale <= kAvgScale
                                 ? decimals::DivideRoundHalfEven(sum * decimals::Pow10(kAvgScale - scale), count)
                                 : decimals::DivideRoundHalfEven(
                                       sum, static_cast<__int128>(count) * decimals::Pow10(scale - kAvgScale)));
          }
          break;
        }
      }
    }
    columns.push_back(std::move(column));
  }
  return RecordBatch(output_, std::move(columns));
}

void HashAggregateOperator::Finish() {
  if (phase_ == AggPhase::kFinal && keys_.empty() && groups_ == 0) {
    // A global aggregate over no rows still yields one row.
    const std::vector<Column> none;
    FindOrInsert(none, 0);
  }
  Emit(Produce());
  Operator::Finish();
}

HashJoinOperator::HashJoinOperator(OperatorContext& context, std::vector<Expr> probe_keys,
                                   std::vector<Expr> build_keys, Schema build_schema, Schema output)
    : Operator(context),
      probe_keys_(std::move(probe_keys)),
      build_keys_(std::move(build_keys)),
      output_(std::move(output)),
      build_(std::move(build_schema)) {}

void HashJoinOperator::PushBuild(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  AppendBatch(build_, batch);
  CheckBudget(build_.ByteSize() * 2, "hash join build side");
}

void HashJoinOperator::FinishBuild() {
  build_key_columns_ = EvaluateAll(build_keys_, build_);
  for (size_t row = 0; row < build_.NumRows(); ++row) {
    if (AnyNull(build_key_columns_, row)) continue;
    index_[RowHash(build_key_columns_, row)].push_back(static_cast<uint32_t>(row));
  }
  built_ = true;
}

void HashJoinOperator::Push(const RecordBatch& batch) {
  Assert(built_, "hash join probed before its build side finished");
  context_.Charge(batch.NumRows());
  const auto probe_keys = EvaluateAll(probe_keys_, batch);
  std::vector<uint32_t> probe_rows;
  std::vector<uint32_t> build_rows;
  for (size_t row = 0; row < batch.NumRows(); ++row) {
    if (probe_keys_.empty()) {
      for (size_t b = 0; b < build_.NumRows(); ++b) {
        probe_rows.push_back(static_cast<uint32_t>(row));
        build_rows.push_back(static_cast<uint32_t>(b));
      }
      continue;
    }
    if (AnyNull(probe_keys, row)) continue;
    const auto it = index_.find(RowHash(probe_keys, row));
    if (it == index_.end()) continue;
    for (uint32_t b : it->second) {
      if (KeysEqual(probe_keys, row, build_key_columns_, b)) {
        probe_rows.push_back(static_cast<uint32_t>(row));
        build_rows.push_back(b);
      }
    }
  }
  if (probe_rows.empty()) return;
  context_.Charge(probe_rows.size());
  std::vector<Column> columns;
  for (const auto& column : batch.Columns()) columns.push_back(column.Take(probe_rows));
  for (const auto& column : build_.Columns()) columns.push_back(column.Take(build_rows));
  Emit(RecordBatch(output_, std::move(columns)));
}

SortOperator::SortOperator(OperatorContext& context, std::vector<SortKey> keys, Schema schema)
    : Operator(context), keys_(std::move(keys)), rows_(std::move(schema)) {}

void SortOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  AppendBatch(rows_, batch);
  CheckBudget(rows_.ByteSize() * 2, "sort");
}

void SortOperator::Finish() {
  const size_t n = rows_.NumRows();
  std::vector<Column> keys;
  for (const auto& key : keys_) keys.push_back(EvaluateExpr(key.expr, rows_));
  std::vector<uint32_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](uint32_t a, uint32_t b) {
    for (size_t i = 0; i < keys.size(); ++i) {
      const bool a_null = keys[i].IsNull(a);
      const bool b_null = keys[i].IsNull(b);
      int c = 0;
      if (a_null || b_null) {
        // Nulls compare greater than every value.
        c = a_null == b_null ? 0 : (a_null ? 1 : -1);
      } else {
        c = CompareCells(keys[i], a, keys[i], b);
      }
      if (keys_[i].descending) c = -c;
      if (c != 0) return c < 0;
    }
    return false;
  });
  if (n > 1) context_.Charge(static_cast<uint64_t>(static_cast<double>(n) * std::log2(static_cast<double>(n))));
  Emit(rows_.Take(order));
  Operator::Finish();
}

LimitOperator::LimitOperator(OperatorContext& context, int64_t limit) : Operator(context), remaining_(limit) {}

void LimitOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  if (remaining_ <= 0) return;
  const auto take = std::min<int64_t>(remaining_, static_cast<int64_t>(batch.NumRows()));
  remaining_ -= take;
  Emit(static_cast<size_t>(take) == batch.NumRows() ? batch : batch.Slice(0, static_cast<size_t>(take)));
}

ExchangeWriteOperator::ExchangeWriteOperator(OperatorContext& context, int partition_count, std::vector<Expr> keys,
                                             Schema schema)
    : Operator(context), keys_(std::move(keys)) {
  Assert(partition_count >= 1, "exchange needs at least one partition");
  for (int p = 0; p < partition_count; ++p) partitions_.emplace_back(schema);
}

void ExchangeWriteOperator::Push(const RecordBatch& batch) {
  context_.Charge(batch.NumRows());
  const int count = static_cast<int>(partitions_.size());
  if (count == 1) {
    partitions_[0].Append(batch);
    return;
  }
  const auto assignment = PartitionRows(batch, keys_, count);
  std::vector<std::vector<uint32_t>> rows(partitions_.size());
  for (size_t row = 0; row < assignment.size(); ++row) rows[assignment[row]].push_back(static_cast<uint32_t>(row));
  for (size_t p = 0; p < partitions_.size(); ++p) {
    if (!rows[p].empty()) partitions_[p].Append(batch.Take(rows[p]));
  }
}

std::vector<OutputReceipt> ExchangeWriteOperator::Finalize(const IoContext& io, int64_t local_now,
                                                           const std::string& bucket,
                                                           const std::vector<std::string>& keys,
                                                           StorageClass storage_class) {
  Assert(keys.size() == partitions_.size(), "one output key per partition");
  std::vector<OutputReceipt> receipts;
  for (size_t p = 0; p < partitions_.size(); ++p) {
    receipts.push_back(partitions_[p].Finalize(io, local_now, bucket, keys[p], storage_class));
  }
  return receipts;
}

uint64_t ExchangeWriteOperator::RowsOut() const {
  uint64_t rows = 0;
  for (const auto& partition : partitions_) rows += partition.Rows();
  return rows;
}

void CollectOperator::Push(const RecordBatch& batch) { AppendBatch(rows_, batch); }

std::unique_ptr<Operator> MakeOperator(const PhysicalOperator& op, const Schema& input_schema,
                                       OperatorContext& context) {
  switch (op.kind) {
    case PhysOpKind::kFilter:
      return std::make_unique<FilterOperator>(context, *op.predicate);
    case PhysOpKind::kProject:
      return std::make_unique<ProjectOperator>(context, op.projections, op.output_schema);
    case PhysOpKind::kHashAggregate:
      return std::make_unique<HashAggregateOperator>(context, op.phase, op.group_keys, op.aggregates,
                                                     op.output_schema);
    case PhysOpKind::kHashJoin:
      return std::make_unique<HashJoinOperator>(context, op.probe_keys, op.build_keys, op.build_schema,
                                                op.output_schema);
    case PhysOpKind::kSort:
      return std::make_unique<SortOperator>(context, op.sort_keys, input_schema);
    case PhysOpKind::kLimit:
      return std::make_unique<LimitOperator>(context, op.limit);
    case PhysOpKind::kExchangeWrite:
      return std::make_unique<ExchangeWriteOperator>(context, op.partition_count, op.partition_keys, input_schema);
    default:
      Fail(ErrorCode::kInvalidArgument, "operator " + std::string(PhysOpKindName(op.kind)) + " is not a pipe operator");
  }
}

}  // namespace skylite
