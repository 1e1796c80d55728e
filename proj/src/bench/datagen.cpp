#include "skylite/bench/datagen.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

#include "skylite/common/errors.hpp"
#include "skylite/storage/columnar_file.hpp"

namespace skylite {

namespace {

constexpr const char* kDatagenTag = "datagen";
constexpr int64_t kRowsPerOrderMax = 7;
// Lines shipped before this date are "F" (filled), after it "O" (open).
const int64_t kCurrentDate = dates::DaysFromCivil(1995, 6, 17);
const int64_t kStartDate = dates::DaysFromCivil(1992, 1, 1);
const int64_t kEndDate = dates::DaysFromCivil(1998, 12, 31);

constexpr std::array<const char*, 7> kShipModes = {"REG AIR", "AIR", "RAIL", "SHIP", "TRUCK", "MAIL", "FOB"};
constexpr std::array<const char*, 4> kInstructions = {"DELIVER IN PERSON", "COLLECT COD", "NONE", "TAKE BACK RETURN"};
constexpr std::array<const char*, 5> kPriorities = {"1-URGENT", "2-HIGH", "3-MEDIUM", "4-NOT SPECIFIED", "5-LOW"};
constexpr std::array<const char*, 24> kWords = {
    "furiously", "quickly",  "carefully", "blithely", "slyly",    "regular", "final",    "express",
    "pending",   "ironic",   "even",      "bold",     "special",  "silent",  "unusual",  "deposits",
    "requests",  "packages", "accounts",  "theodolites", "pinto", "beans",   "foxes",    "instructions"};

std::string Comment(Rng& rng, size_t min_length, size_t max_length) {
  const auto target = static_cast<size_t>(rng.UniformInt(static_cast<int64_t>(min_length), static_cast<int64_t>(max_length)));
  std::string text;
  while (text.size() < target) {
    if (!text.empty()) text += ' ';
    text += kWords[static_cast<size_t>(rng.UniformInt(0, kWords.size() - 1))];
  }
  text.resize(target);
  return text;
}

// Part retail price in cents, as in the reference generator.
int64_t RetailPriceCents(int64_t partkey) { return 90000 + ((partkey / 10) % 20001) + 100 * (partkey % 1000); }

// Sparse order keys: eight consecutive keys out of every 32.
int64_t OrderKey(uint64_t index) { return static_cast<int64_t>((index / 8) * 32 + index % 8 + 1); }

std::string FormatScale(double scale_factor) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", scale_factor);
  return buffer;
}

// Buffers rows into row groups and cuts a new object whenever the current one reaches the target size.
class TableSink {
 public:
  TableSink(Simulator& sim, const DataGenSpec& spec, std::string table, Schema schema)
      : sim_(sim), spec_(spec), table_(std::move(table)), schema_(std::move(schema)), pending_(schema_) {}

  void AppendRow(const std::vector<Value>& row) {
    pending_.AppendRow(row);
    if (pending_.NumRows() >= spec_.row_group_rows) FlushGroup();
  }

  TableEntry Finish(uint64_t version) {
    FlushGroup();
    if (writer_ || entry_.objects.empty()) CutObject();
    entry_.name = table_;
    entry_.schema = schema_;
    entry_.version = version;
    return std::move(entry_);
  }

 private:
  ColumnarFileWriter& Writer() {
    if (!writer_) writer_ = std::make_unique<ColumnarFileWriter>(schema_, WriterOptions{spec_.row_group_rows});
    return *writer_;
  }

  void FlushGroup() {
    if (pending_.NumRows() == 0) return;
    Writer().Append(pending_);
    pending_ = RecordBatch(schema_);
    if (writer_->BytesWritten() >= spec_.target_file_bytes) CutObject();
  }

  void CutObject() {
    std::string bytes = Writer().Finish();
    writer_.reset();
    const FileFooter footer = ReadFooterFromFile(bytes);
    char name[32];
    std::snprintf(name, sizeof(name), "part-%05zu.skyc", entry_.objects.size());
    ObjectEntry object;
    object.bucket = spec_.bucket;
    object.key = spec_.prefix + "/sf" + FormatScale(spec_.scale_factor) + "/" + table_ + "/" + name;
    object.file_bytes = bytes.size();
    object.row_count = footer.TotalRows();
    for (const auto& group : footer.row_groups) {
      object.row_group_bytes.push_back(group.ByteSize());
      object.row_group_rows.push_back(group.row_count);
    }
    sim_.PutObject({sim_.Now(), kDatagenTag}, object.bucket, object.key, std::move(bytes));
    entry_.objects.push_back(std::move(object));
  }

  Simulator& sim_;
  const DataGenSpec& spec_;
  std::string table_;
  Schema schema_;
  RecordBatch pending_;
  std::unique_ptr<ColumnarFileWriter> writer_;
  TableEntry entry_;
};

}  // namespace

Schema LineitemSchema() {
  const DataType money = DataType::Decimal(15, 2);
  return Schema({{"l_orderkey", DataType::Int64()},    {"l_partkey", DataType::Int64()},
                 {"l_suppkey", DataType::Int64()},     {"l_linenumber", DataType::Int64()},
                 {"l_quantity", money},                {"l_extendedprice", money},
                 {"l_discount", money},                {"l_tax", money},
                 {"l_returnflag", DataType::String()}, {"l_linestatus", DataType::String()},
                 {"l_shipdate", DataType::Date()},     {"l_commitdate", DataType::Date()},
                 {"l_receiptdate", DataType::Date()},  {"l_shipinstruct", DataType::String()},
                 {"l_shipmode", DataType::String()},   {"l_comment", DataType::String()}});
}

Schema OrdersSchema() {
  return Schema({{"o_orderkey", DataType::Int64()},
                 {"o_custkey", DataType::Int64()},
                 {"o_orderstatus", DataType::String()},
                 {"o_totalprice", DataType::Decimal(15, 2)},
                 {"o_orderdate", DataType::Date()},
                 {"o_orderpriority", DataType::String()},
                 {"o_clerk", DataType::String()},
                 {"o_shippriority", DataType::Int64()},
                 {"o_comment", DataType::String()}});
}

uint64_t OrdersRowCount(double scale_factor) {
  return std::max<uint64_t>(1, static_cast<uint64_t>(std::llround(1500000.0 * scale_factor)));
}

Catalog GenerateTpch(Simulator& sim, const DataGenSpec& spec, const Catalog& previous) {
  if (!(spec.scale_factor > 0)) Fail(ErrorCode::kInvalidArgument, "scale factor must be positive");
  if (spec.row_group_rows == 0) Fail(ErrorCode::kInvalidArgument, "row groups need at least one row");
  const bool want_lineitem = std::count(spec.tables.begin(), spec.tables.end(), "lineitem") > 0;
  const bool want_orders = std::count(spec.tables.begin(), spec.tables.end(), "orders") > 0;
  for (const auto& table : spec.tables) {
    if (table != "lineitem" && table != "orders") Fail(ErrorCode::kInvalidArgument, "unknown table " + table);
  }

  Rng rng(spec.seed);
  TableSink lineitem(sim, spec, "lineitem", LineitemSchema());
  TableSink orders(sim, spec, "orders", OrdersSchema());
  const uint64_t order_count = OrdersRowCount(spec.scale_factor);
  const int64_t parts = std::max<int64_t>(1, std::llround(200000.0 * spec.scale_factor));
  const int64_t suppliers = std::max<int64_t>(1, std::llround(10000.0 * spec.scale_factor));
  const int64_t customers = std::max<int64_t>(1, std::llround(150000.0 * spec.scale_factor));
  const int64_t clerks = std::max<int64_t>(1, std::llround(1000.0 * spec.scale_factor));
  const auto money = [](int64_t cents) { return Value::Decimal(cents, 15, 2); };

  for (uint64_t index = 0; index < order_count; ++index) {
    const int64_t orderkey = OrderKey(index);
    const int64_t orderdate = rng.UniformInt(kStartDate, kEndDate - 151);
    const int64_t lines = rng.UniformInt(1, kRowsPerOrderMax);
    __int128 total = 0;
    int filled = 0;
    for (int64_t line = 1; line <= lines; ++line) {
      const int64_t partkey = rng.UniformInt(1, parts);
      const int64_t suppkey = rng.UniformInt(1, suppliers);
      const int64_t quantity = rng.UniformInt(1, 50);
      const int64_t extended = quantity * RetailPriceCents(partkey);
      const int64_t discount = rng.UniformInt(0, 10);
      const int64_t tax = rng.UniformInt(0, 8);
      const int64_t shipdate = orderdate + rng.UniformInt(1, 121);
      const int64_t commitdate = orderdate + rng.UniformInt(30, 90);
      const int64_t receiptdate = shipdate + rng.UniformInt(1, 30);
      std::string returnflag = "N";
      if (receiptdate <= kCurrentDate) returnflag = rng.Bernoulli(0.5) ? "R" : "A";
      const bool shipped = shipdate <= kCurrentDate;
      filled += shipped ? 1 : 0;
      const char* instruction = kInstructions[static_cast<size_t>(rng.UniformInt(0, kInstructions.size() - 1))];
      const char* mode = kShipModes[static_cast<size_t>(rng.UniformInt(0, kShipModes.size() - 1))];
      std::string comment = Comment(rng, 10, 43);
      total += static_cast<__int128>(extended) * (100 + tax) * (100 - discount);
      if (want_lineitem) {
        lineitem.AppendRow({Value::Int64(orderkey), Value::Int64(partkey), Value::Int64(suppkey), Value::Int64(line),
                            money(quantity * 100), money(extended), money(discount), money(tax),
                            Value::String(std::move(returnflag)), Value::String(shipped ? "F" : "O"),
                            Value::Date(shipdate), Value::Date(commitdate), Value::Date(receiptdate),
                            Value::String(instruction), Value::String(mode), Value::String(std::move(comment))});
      }
    }
    const int64_t custkey = rng.UniformInt(1, customers);
    const char* priority = kPriorities[static_cast<size_t>(rng.UniformInt(0, kPriorities.size() - 1))];
    char clerk[32];
    std::snprintf(clerk, sizeof(clerk), "Clerk#%09lld", static_cast<long long>(rng.UniformInt(1, clerks)));
    std::string comment = Comment(rng, 19, 78);
    if (want_orders) {
      const char* status = filled == lines ? "F" : (filled == 0 ? "O" : "P");
      orders.AppendRow({Value::Int64(orderkey), Value::Int64(custkey), Value::String(status),
                        money(decimals::DivideRoundHalfEven(total, 10000)), Value::Date(orderdate),
                        Value::String(priority), Value::String(clerk), Value::Int64(0),
                        Value::String(std::move(comment))});
    }
  }

  Catalog catalog = previous;
  const auto version_of = [&](const std::string& table) {
    return previous.Has(table) ? previous.Resolve(table).version + 1 : 1;
  };
  if (want_lineitem) catalog.Put(lineitem.Finish(version_of("lineitem")));
  if (want_orders) catalog.Put(orders.Finish(version_of("orders")));
  return catalog;
}

}  // namespace skylite
