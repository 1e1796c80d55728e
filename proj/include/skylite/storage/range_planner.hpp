#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "skylite/sim/sim_types.hpp"
#include "skylite/storage/columnar_file.hpp"

namespace skylite {

constexpr uint64_t kDefaultMaxRequestBytes = 16 * kMiB;

struct RangeRequest {
  std::string bucket;
  std::string key;
  uint64_t offset = 0;
  uint64_t length = 0;
  // Index of the chunk buffer this range fills.
  size_t target_buffer_index = 0;
  // Position of the range inside that buffer.
  uint64_t buffer_offset = 0;
};

// One column chunk to reassemble from one or more ranges.
struct PlannedChunk {
  size_t row_group = 0;
  // Column index in the file schema.
  size_t column = 0;
  uint64_t offset = 0;
  uint64_t length = 0;
};

struct RangeRequestPlan {
  std::vector<RangeRequest> ranges;
  // Buffer i holds chunks[i].
  std::vector<PlannedChunk> chunks;
  // Surviving row groups, ascending.
  std::vector<size_t> row_groups;
  // Projected file columns in output order.
  std::vector<size_t> columns;
  uint64_t max_request_bytes = kDefaultMaxRequestBytes;

  uint64_t TotalBytes() const;
};

// Plans the chunk reads of `projected_columns` in the row groups listed in `row_groups` (all when empty) that
// `predicates` cannot prune. Chunks larger than `max_request_bytes` are split into consecutive sub-ranges.
// Throws UnknownColumn.
RangeRequestPlan PlanRanges(const std::string& bucket, const std::string& key, const FileFooter& footer,
                            const std::vector<std::string>& projected_columns,
                            const std::vector<PrunePredicate>& predicates = {},
                            uint64_t max_request_bytes = kDefaultMaxRequestBytes,
                            const std::vector<size_t>& row_groups = {});

}  // namespace skylite
