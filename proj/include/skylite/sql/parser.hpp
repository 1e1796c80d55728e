#pragma once

#include <string_view>

#include "skylite/sql/ast.hpp"

namespace skylite {

// Recursive-descent parser for single SELECT statements. Throws SyntaxError (with offset) and NotSupported for
// recognized but unsupported constructs such as subqueries.
SelectStatement Parse(std::string_view sql);

// Parses the {"query": "<sql>"} request envelope and returns the SQL text. Throws InvalidArgument.
std::string ParseQueryEnvelope(std::string_view json);

}  // namespace skylite
