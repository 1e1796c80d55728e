#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <unordered_map>
#include <vector>

#include "skylite/execution/work_clock.hpp"
#include "skylite/optimizer/physical_plan.hpp"
#include "skylite/storage/output_handler.hpp"
#include "skylite/storage/record_batch.hpp"

namespace skylite {

// Shared by the operators of one fragment.
struct OperatorContext {
  // Absent in unit tests; compute is then not accounted.
  WorkClock* clock = nullptr;
  // 0 disables the check. Exceeding it throws OutOfBudget.
  uint64_t memory_budget_bytes = 0;
  size_t batch_size = kDefaultBatchSize;

  void Charge(uint64_t rows) const {
    if (clock) clock->ChargeRows(rows);
  }
};

// Push-based operator: the upstream calls Push for every batch and Finish once at the end of its stream.
// Pipeline breakers (aggregate, sort, exchange write) emit from Finish.
class Operator {
 public:
  explicit Operator(OperatorContext& context) : context_(context) {}
  virtual ~Operator() = default;
  Operator(const Operator&) = delete;
  Operator& operator=(const Operator&) = delete;

  void SetNext(Operator* next) { next_ = next; }
  virtual void Push(const RecordBatch& batch) = 0;
  virtual void Finish();

 protected:
  // Forwards non-empty output in batches of at most the context batch size.
  void Emit(const RecordBatch& batch);
  void CheckBudget(uint64_t bytes, const char* what) const;

  OperatorContext& context_;
  Operator* next_ = nullptr;
};

class FilterOperator : public Operator {
 public:
  FilterOperator(OperatorContext& context, Expr predicate);
  void Push(const RecordBatch& batch) override;

 private:
  Expr predicate_;
};

class ProjectOperator : public Operator {
 public:
  ProjectOperator(OperatorContext& context, std::vector<NamedExpr> projections, Schema output);
  void Push(const RecordBatch& batch) override;

 private:
  std::vector<NamedExpr> projections_;
  Schema output_;
};

// Hash aggregation. The partial phase turns input rows into per-group states (see PartialStateFields); the
// final phase merges states and produces the aggregate values. Groups are emitted in first-seen order.
class HashAggregateOperator : public Operator {
 public:
  HashAggregateOperator(OperatorContext& context, AggPhase phase, std::vector<NamedExpr> keys,
                        std::vector<AggregateCall> aggregates, Schema output);
  void Push(const RecordBatch& batch) override;
  void Finish() override;
  size_t Groups() const { return groups_; }

 private:
  struct State {
    std::vector<int64_t> ints;
    std::vector<double> floats;
    std::vector<int64_t> counts;
    std::vector<uint8_t> has_value;
    std::vector<Value> extremes;
  };
  uint32_t FindOrInsert(const std::vector<Column>& keys, size_t row);
  void Accumulate(size_t index, uint32_t group, const RecordBatch& batch, const std::vector<Column>& inputs, size_t row);
  RecordBatch Produce() const;

  AggPhase phase_;
  std::vector<NamedExpr> keys_;
  std::vector<AggregateCall> aggregates_;
  Schema output_;
  std::vector<Column> group_keys_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> index_;
  std::vector<State> states_;
  size_t groups_ = 0;
};

// Inner hash join: the build side is loaded completely, then probe batches stream through. Output columns
// are the probe columns followed by the build columns; rows follow probe order, then build insertion order.
class HashJoinOperator : public Operator {
 public:
  HashJoinOperator(OperatorContext& context, std::vector<Expr> probe_keys, std::vector<Expr> build_keys,
                   Schema build_schema, Schema output);
  void PushBuild(const RecordBatch& batch);
  void FinishBuild();
  void Push(const RecordBatch& batch) override;

 private:
  std::vector<Expr> probe_keys_;
  std::vector<Expr> build_keys_;
  Schema output_;
  RecordBatch build_;
  std::vector<Column> build_key_columns_;
  std::unordered_map<uint64_t, std::vector<uint32_t>> index_;
  bool built_ = false;
};

// Stable sort; nulls sort last ascending and first descending.
class SortOperator : public Operator {
 public:
  SortOperator(OperatorContext& context, std::vector<SortKey> keys, Schema schema);
  void Push(const RecordBatch& batch) override;
  void Finish() override;

 private:
  std::vector<SortKey> keys_;
  RecordBatch rows_;
};

class LimitOperator : public Operator {
 public:
  LimitOperator(OperatorContext& context, int64_t limit);
  void Push(const RecordBatch& batch) override;

 private:
  int64_t remaining_;
};

// Hash-partitions rows into one output object per partition: partition = hash(keys) mod partition_count.
class ExchangeWriteOperator : public Operator {
 public:
  ExchangeWriteOperator(OperatorContext& context, int partition_count, std::vector<Expr> keys, Schema schema);
  void Push(const RecordBatch& batch) override;
  void Finish() override {}
  // Writes every partition object (empty ones included) in partition order; returns the receipts.
  std::vector<OutputReceipt> Finalize(const IoContext& io, int64_t local_now, const std::string& bucket,
                                      const std::vector<std::string>& keys, StorageClass storage_class);
  uint64_t RowsOut() const;

 private:
  std::vector<Expr> keys_;
  std::vector<OutputHandler> partitions_;
};

// Collects everything it receives (tests and in-process execution).
class CollectOperator : public Operator {
 public:
  CollectOperator(OperatorContext& context, Schema schema) : Operator(context), rows_(std::move(schema)) {}
  void Push(const RecordBatch& batch) override;
  void Finish() override {}
  const RecordBatch& Rows() const { return rows_; }

 private:
  RecordBatch rows_;
};

// Partition of every row of a batch for the given keys.
std::vector<uint32_t> PartitionRows(const RecordBatch& batch, const std::vector<Expr>& keys, int partition_count);

// Appends all rows of `source` to `target` (same schema).
void AppendBatch(RecordBatch& target, const RecordBatch& source);

// Instantiates the non-source, non-sink operators of a pipeline (exchange write included).
std::unique_ptr<Operator> MakeOperator(const PhysicalOperator& op, const Schema& input_schema, OperatorContext& context);

}  // namespace skylite
