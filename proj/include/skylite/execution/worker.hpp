#pragma once

#include <string>
#include <vector>

#include "skylite/common/errors.hpp"
#include "skylite/optimizer/fragment_spec.hpp"
#include "skylite/sim/simulator.hpp"

namespace skylite {

constexpr const char* kWorkerFunctionName = "skylite-worker";

FunctionSpec WorkerFunction(int memory_mib);

// Invocation payloads. A root payload carries a contiguous slice of fragments: the root invokes every other
// member of the slice and then executes the first one itself.
std::string FragmentPayload(const FragmentSpec& spec);
std::string RootPayload(const std::vector<FragmentSpec>& slice, const std::string& failure_queue);

// Which fragments a payload (fragment or root) carries, as (pipeline, fragment) pairs; empty when malformed.
std::vector<std::pair<int, int>> PayloadFragments(const std::string& payload);

FailureClass ClassifyError(ErrorCode code);

// Executes one fragment inside a running invocation: loads join build sides, streams the source through the
// operator chain, materializes every sink partition and returns the response (not yet sent). Never throws for
// errors raised by the fragment itself; those are reported in the response.
WorkerResponse ExecuteFragment(const FragmentSpec& spec, WorkerContext& context);

// Entry point of the worker function: executes the payload and sends one response per executed fragment to the
// fragment's response queue.
void WorkerMain(WorkerContext& context);

}  // namespace skylite
