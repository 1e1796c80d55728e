#pragma once

#include <string>

#include "skylite/sql/logical_plan.hpp"

namespace skylite {

// Bumped whenever the canonical form or the execution semantics change, invalidating old registry entries.
constexpr int kCanonicalFormVersion = 1;

// Deterministic serialization of a logically optimized plan: conjuncts sorted, literals rendered with their
// types, scans carrying their manifest version. Physical properties (worker counts, join strategies) are absent.
std::string CanonicalPlan(const LogicalPlan& plan);

// Lowercase hex SHA-256 of the canonical plan.
std::string ResultCacheKey(const LogicalPlan& plan);

}  // namespace skylite
