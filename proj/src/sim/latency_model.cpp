#include "skylite/sim/latency_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "skylite/common/errors.hpp"

namespace skylite {

double LatencyDistribution::Sigma() const {
  if (tail_ms <= median_ms || median_ms <= 0) return 0.0;
  return std::log(tail_ms / median_ms) / kTailZ;
}

SimTime LatencyDistribution::Sample(Rng& rng) const {
  const double sigma = Sigma();
  double value = median_ms;
  if (sigma > 0) {
    value = median_ms * std::exp(sigma * rng.Normal());
  }
  value = std::clamp(value, min_ms, max_ms);
  return Millis(value);
}

void LatencyDistribution::Validate(const std::string& name) const {
  if (!(min_ms >= 0 && min_ms <= median_ms && median_ms <= max_ms && tail_ms >= median_ms && tail_ms <= max_ms)) {
    Fail(ErrorCode::kInvalidArgument, "latency '" + name + "' must satisfy 0 <= min <= median <= tail <= max");
  }
}

std::string LatencyDistribution::ToString() const {
  std::ostringstream out;
  out << min_ms << "/" << median_ms << "/" << tail_ms << "/" << max_ms;
  return out.str();
}

LatencyDistribution LatencyDistribution::Parse(const std::string& text) {
  LatencyDistribution result;
  char slash1 = 0;
  char slash2 = 0;
  char slash3 = 0;
  std::istringstream in(text);
  in >> result.min_ms >> slash1 >> result.median_ms >> slash2 >> result.tail_ms >> slash3 >> result.max_ms;
  if (in.fail() || slash1 != '/' || slash2 != '/' || slash3 != '/') {
    Fail(ErrorCode::kInvalidArgument, "latency must be min/median/tail/max, got '" + text + "'");
  }
  in >> std::ws;
  if (!in.eof()) {
    Fail(ErrorCode::kInvalidArgument, "trailing characters in latency '" + text + "'");
  }
  return result;
}

}  // namespace skylite
