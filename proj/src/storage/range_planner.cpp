#include "skylite/storage/range_planner.hpp"

#include "skylite/common/errors.hpp"

namespace skylite {

uint64_t RangeRequestPlan::TotalBytes() const {
  uint64_t bytes = 0;
  for (const auto& range : ranges) bytes += range.length;
  return bytes;
}

RangeRequestPlan PlanRanges(const std::string& bucket, const std::string& key, const FileFooter& footer,
                            const std::vector<std::string>& projected_columns,
                            const std::vector<PrunePredicate>& predicates, uint64_t max_request_bytes,
                            const std::vector<size_t>& row_groups) {
  if (max_request_bytes == 0) Fail(ErrorCode::kInvalidArgument, "max_request_bytes must be positive");
  RangeRequestPlan plan;
  plan.max_request_bytes = max_request_bytes;
  for (const auto& name : projected_columns) plan.columns.push_back(footer.schema.IndexOrFail(name));

  std::vector<size_t> candidates = row_groups;
  if (candidates.empty()) {
    for (size_t g = 0; g < footer.row_groups.size(); ++g) candidates.push_back(g);
  }
  for (const auto group : candidates) {
    if (group >= footer.row_groups.size()) {
      Fail(ErrorCode::kInvalidArgument, "row group " + std::to_string(group) + " out of range for " + key);
    }
    if (!RowGroupMayMatch(footer, group, predicates)) continue;
    plan.row_groups.push_back(group);
    for (const auto column : plan.columns) {
      const auto& meta = footer.row_groups[group].columns[column];
      const size_t buffer = plan.chunks.size();
      plan.chunks.push_back({group, column, meta.offset, meta.length});
      for (uint64_t done = 0; done < meta.length; done += max_request_bytes) {
        const uint64_t length = std::min(max_request_bytes, meta.length - done);
        plan.ranges.push_back({bucket, key, meta.offset + done, length, buffer, done});
      }
    }
  }
  return plan;
}

}  // namespace skylite
