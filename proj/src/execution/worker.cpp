#include "skylite/execution/worker.hpp"

#include <algorithm>
#include <memory>

#include "skylite/common/errors.hpp"
#include "skylite/execution/operators.hpp"
#include "skylite/execution/work_clock.hpp"
#include "skylite/storage/input_handler.hpp"

namespace skylite {

namespace {

using nlohmann::json;

std::vector<std::string> FieldNames(const Schema& schema) {
  std::vector<std::string> names;
  for (size_t i = 0; i < schema.Size(); ++i) names.push_back(schema.At(i).name);
  return names;
}

std::vector<ScanObject> ExchangeObjects(const FragmentSpec& spec, int producer) {
  const auto it = spec.exchange_inputs.find(producer);
  if (it == spec.exchange_inputs.end()) {
    Fail(ErrorCode::kInvalidArgument, "fragment has no inputs for pipeline " + std::to_string(producer));
  }
  std::vector<ScanObject> objects;
  for (const auto& key : it->second) objects.push_back({spec.intermediate_bucket, key, {}});
  return objects;
}

// Everything one fragment execution owns.
class FragmentRun {
 public:
  FragmentRun(const FragmentSpec& spec, WorkerContext& context)
      : spec_(spec),
        io_(IoContext::ForWorker(context)),
        clock_(context.Sim().Config().compute, context.Function().Vcpus(), context.Now()),
        input_(InputFor(spec)),
        fetcher_(io_, input_, context.Now()) {
    op_context_.clock = &clock_;
    op_context_.memory_budget_bytes = spec.memory_budget_bytes;
  }

  // Returns the local time at which the last output object was acknowledged.
  SimTime Run(WorkerResponse& response) {
    const auto& ops = spec_.operators;
    if (ops.size() < 2 || ops.back().kind != PhysOpKind::kExchangeWrite) {
      Fail(ErrorCode::kInvalidArgument, "fragment must end in an exchange write");
    }
    const auto& source = ops.front();
    Schema schema = source.output_schema;
    for (size_t i = 1; i < ops.size(); ++i) {
      chain_.push_back(MakeOperator(ops[i], schema, op_context_));
      if (ops[i].kind != PhysOpKind::kExchangeWrite) schema = ops[i].output_schema;
      if (i > 1) chain_[i - 2]->SetNext(chain_[i - 1].get());
    }

    for (size_t i = 1; i < ops.size(); ++i) {
      if (ops[i].kind != PhysOpKind::kHashJoin) continue;
      auto* join = static_cast<HashJoinOperator*>(chain_[i - 1].get());
      Scan(ExchangeObjects(spec_, ops[i].build_pipeline), FieldNames(ops[i].build_schema), {},
           [&](const RecordBatch& batch) { join->PushBuild(batch); });
      join->FinishBuild();
    }

    Operator& first = *chain_.front();
    switch (source.kind) {
      case PhysOpKind::kScan:
        Scan(spec_.scan.objects, source.columns, source.prune_predicates, [&](const RecordBatch& batch) {
          response.stats.rows_in += batch.NumRows();
          first.Push(batch);
        });
        break;
      case PhysOpKind::kExchangeRead:
        Scan(ExchangeObjects(spec_, source.input_pipeline), FieldNames(source.output_schema), {},
             [&](const RecordBatch& batch) {
               response.stats.rows_in += batch.NumRows();
               first.Push(batch);
             });
        break;
      case PhysOpKind::kOneRow: {
        RecordBatch one(source.output_schema);
        one.AppendRow(std::vector<Value>{});
        response.stats.rows_in += 1;
        first.Push(one);
        break;
      }
      default:
        Fail(ErrorCode::kInvalidArgument, "operator " + std::string(PhysOpKindName(source.kind)) + " is not a source");
    }
    first.Finish();

    auto& sink = static_cast<ExchangeWriteOperator&>(*chain_.back());
    std::vector<std::string> keys;
    for (int p = 0; p < ops.back().partition_count; ++p) keys.push_back(spec_.OutputKey(p));
    SimTime done = clock_.Now();
    const auto receipts = sink.Finalize(io_, done, spec_.intermediate_bucket, keys, ops.back().storage_class);
    for (const auto& receipt : receipts) {
      response.output_keys.push_back(receipt.key);
      response.stats.bytes_written += receipt.bytes;
      response.stats.requests += static_cast<uint64_t>(receipt.attempts);
      done = std::max(done, receipt.done);
    }
    response.stats.rows_out = sink.RowsOut();
    return done;
  }

  void CollectFetchStats(WorkerResponse& response) const {
    const auto& fetch = fetcher_.Stats();
    response.stats.bytes_read = fetch.bytes;
    response.stats.requests += fetch.requests;
    response.stats.retriggers = fetch.retriggers;
  }

  SimTime Now() { return clock_.Now(); }

 private:
  static InputOptions InputFor(const FragmentSpec& spec) {
    InputOptions options;
    options.parallelism = std::max<size_t>(1, spec.io_parallelism);
    options.retrigger = spec.io_retrigger;
    return options;
  }

  template <typename Consume>
  void Scan(std::vector<ScanObject> objects, std::vector<std::string> columns, std::vector<PrunePredicate> predicates,
            Consume&& consume) {
    if (objects.empty()) return;
    InputHandler handler(fetcher_, input_);
    ScanRequest request{std::move(objects), std::move(columns), std::move(predicates)};
    handler.Scan(request, clock_.Now(), [&](ScanBatch&& batch) {
      clock_.WaitUntil(batch.ready);
      clock_.ChargeBytes(batch.decoded_bytes);
      consume(batch.batch);
    });
  }

  const FragmentSpec& spec_;
  IoContext io_;
  WorkClock clock_;
  InputOptions input_;
  RangeFetcher fetcher_;
  OperatorContext op_context_;
  std::vector<std::unique_ptr<Operator>> chain_;
};

// Best-effort identification of a fragment whose spec could not be decoded.
WorkerResponse MalformedResponse(const json& fragment, const std::string& error, std::string* queue) {
  WorkerResponse response;
  if (fragment.is_object()) {
    response.query_id = fragment.value("query_id", std::string());
    if (fragment.contains("pipeline_id") && fragment["pipeline_id"].is_number_integer()) {
      response.pipeline_id = fragment["pipeline_id"].get<int>();
    }
    if (fragment.contains("fragment_id") && fragment["fragment_id"].is_number_integer()) {
      response.fragment_id = fragment["fragment_id"].get<int>();
    }
    if (fragment.contains("response_queue") && fragment["response_queue"].is_string()) {
      *queue = fragment["response_queue"].get<std::string>();
    }
  }
  response.failure = FailureClass::kCodeError;
  response.error_code = std::string(ErrorCodeName(ErrorCode::kInvalidArgument));
  response.error = error;
  return response;
}

void ExecuteAndRespond(const json& fragment, WorkerContext& context) {
  FragmentSpec spec;
  try {
    spec = FragmentSpec::FromJson(fragment);
  } catch (const std::exception& error) {
    std::string queue;
    WorkerResponse response = MalformedResponse(fragment, error.what(), &queue);
    response.invocation = context.Id();
    // Without a queue nobody can be told; crashing routes the payload to the failure queue instead.
    if (queue.empty()) throw;
    context.Sim().SendMessage(context.Request(), queue, response.Serialize());
    return;
  }
  const WorkerResponse response = ExecuteFragment(spec, context);
  context.Sim().SendMessage(context.Request(), spec.response_queue, response.Serialize());
}

}  // namespace

FunctionSpec WorkerFunction(int memory_mib) { return {kWorkerFunctionName, memory_mib}; }

std::string FragmentPayload(const FragmentSpec& spec) { return json{{"fragment", spec.ToJson()}}.dump(); }

std::string RootPayload(const std::vector<FragmentSpec>& slice, const std::string& failure_queue) {
  json specs = json::array();
  for (const auto& spec : slice) specs.push_back(spec.ToJson());
  return json{{"root", std::move(specs)}, {"failure_queue", failure_queue}}.dump();
}

std::vector<std::pair<int, int>> PayloadFragments(const std::string& payload) {
  std::vector<std::pair<int, int>> result;
  const json parsed = json::parse(payload, nullptr, false);
  if (!parsed.is_object()) return result;
  std::vector<json> fragments;
  if (parsed.contains("fragment")) fragments.push_back(parsed["fragment"]);
  if (parsed.contains("root") && parsed["root"].is_array()) {
    for (const auto& fragment : parsed["root"]) fragments.push_back(fragment);
  }
  for (const auto& fragment : fragments) {
    if (!fragment.is_object()) continue;
    const auto pipeline = fragment.find("pipeline_id");
    const auto id = fragment.find("fragment_id");
    if (pipeline == fragment.end() || id == fragment.end() || !pipeline->is_number_integer() ||
        !id->is_number_integer()) {
      continue;
    }
    result.emplace_back(pipeline->get<int>(), id->get<int>());
  }
  return result;
}

FailureClass ClassifyError(ErrorCode code) {
  switch (code) {
    case ErrorCode::kOutOfBudget:
      return FailureClass::kDataSkew;
    case ErrorCode::kFetchFailed:
    case ErrorCode::kRequestFailed:
      return FailureClass::kTransient;
    default:
      return FailureClass::kCodeError;
  }
}

WorkerResponse ExecuteFragment(const FragmentSpec& spec, WorkerContext& context) {
  WorkerResponse response;
  response.query_id = spec.query_id;
  response.pipeline_id = spec.pipeline_id;
  response.fragment_id = spec.fragment_id;
  response.invocation = context.Id();
  const SimTime start = context.Now();
  FragmentRun run(spec, context);
  SimTime end = start;
  try {
    end = run.Run(response);
  } catch (const SkyliteError& error) {
    response.failure = ClassifyError(error.Code());
    response.error_code = std::string(ErrorCodeName(error.Code()));
    response.error = error.what();
  } catch (const std::exception& error) {
    response.failure = FailureClass::kCodeError;
    response.error_code = std::string(ErrorCodeName(ErrorCode::kInternal));
    response.error = error.what();
  }
  if (!response.Ok()) {
    response.output_keys.clear();
    end = std::max(end, run.Now());
  }
  run.CollectFetchStats(response);
  context.AdvanceTo(end);
  response.stats.wall_ms = ToMillis(context.ToSimTime(context.Now()) - context.ToSimTime(start));
  return response;
}

void WorkerMain(WorkerContext& context) {
  const json payload = json::parse(context.Payload());
  if (payload.contains("root")) {
    const auto& slice = payload.at("root");
    if (!slice.is_array() || slice.empty()) Fail(ErrorCode::kInvalidArgument, "empty root slice");
    const std::string failure_queue = payload.value("failure_queue", std::string());
    const FunctionSpec function = context.Function();
    for (size_t i = 1; i < slice.size(); ++i) {
      context.Invoke(function, json{{"fragment", slice[i]}}.dump(), WorkerMain, failure_queue);
    }
    ExecuteAndRespond(slice[0], context);
    return;
  }
  ExecuteAndRespond(payload.at("fragment"), context);
}

}  // namespace skylite
