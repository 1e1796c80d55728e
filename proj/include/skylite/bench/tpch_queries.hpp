#pragma once

#include <string>

namespace skylite {

// TPC-H queries 1, 6 and 12 with their default substitution parameters.
const std::string& TpchQuery(int number);
bool IsSupportedTpchQuery(int number);

}  // namespace skylite
