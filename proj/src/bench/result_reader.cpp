#include "skylite/bench/result_reader.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skylite/common/errors.hpp"
#include "skylite/storage/columnar_file.hpp"

namespace skylite {

namespace {

bool CellsMatch(const Value& a, const Value& b, double tolerance) {
  if (a.IsNull() || b.IsNull()) return a.IsNull() && b.IsNull();
  if (a.Type().id == TypeId::kFloat64 && b.Type().id == TypeId::kFloat64) {
    const double x = a.AsDouble();
    const double y = b.AsDouble();
    if (x == y) return true;
    return std::fabs(x - y) <= tolerance * std::max(std::fabs(x), std::fabs(y));
  }
  return a == b;
}

std::vector<std::vector<Value>> RowsOf(const RecordBatch& batch, bool sorted) {
  std::vector<std::vector<Value>> rows;
  for (size_t r = 0; r < batch.NumRows(); ++r) rows.push_back(batch.Row(r));
  if (sorted) {
    std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
      for (size_t i = 0; i < a.size(); ++i) {
        if (a[i].IsNull() != b[i].IsNull()) return a[i].IsNull();
        if (a[i].IsNull()) continue;
        const int c = a[i].Compare(b[i]);
        if (c != 0) return c < 0;
      }
      return false;
    });
  }
  return rows;
}

std::string RowText(const std::vector<Value>& row) {
  std::string text = "(";
  for (size_t i = 0; i < row.size(); ++i) text += (i ? ", " : "") + row[i].ToString();
  return text + ")";
}

}  // namespace

RecordBatch FetchResult(Simulator& sim, const QueryResult& result) {
  RecordBatch rows(result.schema);
  for (const auto& key : result.result_keys) {
    const auto object = sim.GetObjectRange({sim.Now(), kClientTag}, result.bucket, key, 0, kToEnd);
    if (object.failed) Fail(ErrorCode::kRequestFailed, "reading result object " + key + " failed");
    std::vector<std::string> names;
    for (const auto& field : result.schema.Fields()) names.push_back(field.name);
    for (const auto& batch : ReadColumnarFile(object.data, names)) {
      for (size_t r = 0; r < batch.NumRows(); ++r) rows.AppendRow(batch, r);
    }
  }
  return rows;
}

std::vector<std::string> ResultObjectBytes(const Simulator& sim, const QueryResult& result) {
  std::vector<std::string> objects;
  for (const auto& key : result.result_keys) {
    const auto object = sim.PeekObject(result.bucket, key);
    if (!object) Fail(ErrorCode::kNoSuchKey, "result object " + key + " is missing");
    objects.push_back(*object->bytes);
  }
  return objects;
}

ResultComparison CompareResults(const RecordBatch& expected, const RecordBatch& actual, bool ordered,
                                double float_tolerance) {
  ResultComparison comparison;
  const auto fail = [&](std::string detail) {
    comparison.equal = false;
    comparison.detail = std::move(detail);
    return comparison;
  };
  const auto& a = expected.GetSchema();
  const auto& b = actual.GetSchema();
  if (a.Size() != b.Size()) return fail("column count " + std::to_string(a.Size()) + " vs " + std::to_string(b.Size()));
  for (size_t i = 0; i < a.Size(); ++i) {
    if (a.At(i).name != b.At(i).name || !(a.At(i).type == b.At(i).type)) {
      return fail("column " + std::to_string(i) + ": " + a.At(i).name + " " + a.At(i).type.ToString() + " vs " +
                  b.At(i).name + " " + b.At(i).type.ToString());
    }
  }
  if (expected.NumRows() != actual.NumRows()) {
    return fail("row count " + std::to_string(expected.NumRows()) + " vs " + std::to_string(actual.NumRows()));
  }
  const auto left = RowsOf(expected, !ordered);
  const auto right = RowsOf(actual, !ordered);
  for (size_t r = 0; r < left.size(); ++r) {
    for (size_t c = 0; c < left[r].size(); ++c) {
      if (!CellsMatch(left[r][c], right[r][c], float_tolerance)) {
        return fail("row " + std::to_string(r) + ": " + RowText(left[r]) + " vs " + RowText(right[r]));
      }
    }
  }
  return comparison;
}

std::string FormatTable(const RecordBatch& batch, size_t max_rows) {
  const auto& schema = batch.GetSchema();
  const size_t shown = std::min(max_rows, batch.NumRows());
  std::vector<std::vector<std::string>> cells(shown + 1);
  for (const auto& field : schema.Fields()) cells[0].push_back(field.name);
  for (size_t r = 0; r < shown; ++r) {
    for (const auto& value : batch.Row(r)) cells[r + 1].push_back(value.IsNull() ? "NULL" : value.ToString());
  }
  std::vector<size_t> widths(schema.Size(), 0);
  for (const auto& row : cells) {
    for (size_t c = 0; c < row.size(); ++c) widths[c] = std::max(widths[c], row[c].size());
  }
  std::ostringstream out;
  for (size_t r = 0; r < cells.size(); ++r) {
    for (size_t c = 0; c < cells[r].size(); ++c) {
      out << (c ? " | " : "") << cells[r][c] << std::string(widths[c] - cells[r][c].size(), ' ');
    }
    out << '\n';
    if (r == 0) {
      for (size_t c = 0; c < widths.size(); ++c) out << (c ? "-+-" : "") << std::string(widths[c], '-');
      out << '\n';
    }
  }
  if (shown < batch.NumRows()) out << "... " << (batch.NumRows() - shown) << " more rows\n";
  out << "(" << batch.NumRows() << " rows)\n";
  return out.str();
}

}  // namespace skylite
