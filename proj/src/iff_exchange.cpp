#include "isacsim/iff_exchange.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace isacsim::iff {

namespace {

struct Task {
  const char* label;
  Actor actor;
  std::int64_t duration_us;
  std::vector<std::size_t> deps;
};

/// Forward-pass scheduler: each task starts when all of its dependencies
/// have finished. Tasks must be appended in dependency order; a dependency
/// index pointing forward means the graph has a cycle.
class EventGraph {
 public:
  std::size_t add(const char* label, Actor actor, std::int64_t duration_us,
                  std::vector<std::size_t> deps) {
    for (std::size_t d : deps) {
      if (d >= tasks_.size())
        throw std::logic_error("EventGraph: dependency on unscheduled task (cycle)");
    }
    tasks_.push_back(Task{label, actor, duration_us, std::move(deps)});
    return tasks_.size() - 1;
  }

  std::vector<TraceEvent> run() const {
    std::vector<TraceEvent> events;
    events.reserve(tasks_.size());
    for (const Task& t : tasks_) {
      std::int64_t start = 0;
      for (std::size_t d : t.deps) start = std::max(start, events[d].end_us);
      events.push_back(TraceEvent{t.label, t.actor, start, start + t.duration_us});
    }
    return events;
  }

 private:
  std::vector<Task> tasks_;
};

std::int64_t makespan_of(const std::vector<TraceEvent>& events) {
  std::int64_t m = 0;
  for (const TraceEvent& e : events) m = std::max(m, e.end_us);
  return m;
}

}  // namespace

ExchangeTrace simulate_exchange(PipelineVariant variant, const TimingBudget& budget,
                                const IffNode& interrogator, const IffNode& responder,
                                const ExchangeOptions& options) {
  validate(budget);
  TimingBudget b = budget;
  if (responder.decode_us) b.t5_us = *responder.decode_us;
  if (responder.respond_us) b.t6_us = *responder.respond_us;
  validate(b);

  const bool responds = responder.allegiance != Allegiance::kUnresponsive;
  constexpr Actor kI = Actor::kInterrogator;
  constexpr Actor kT = Actor::kTransponder;

  EventGraph graph;
  std::int64_t interrogation_sent_end = 0;

  if (variant == PipelineVariant::kSeparated) {
    const auto e1 = graph.add("t1", kI, b.t1_us, {});
    const auto e2 = graph.add("t2", kI, b.t2_us, {e1});
    const auto e3 = graph.add("t3", kI, b.t3_us, {e2});
    const auto e4 = graph.add("t4", kI, b.t4_us, {e3});
    if (responds) {
      const auto e5 = graph.add("t5", kT, b.t5_us, {e4});
      const auto e6 = graph.add("t6", kI, b.t6_us, {e5});
      graph.add("t7", kI, b.t7_us, {e6});
    }
    auto events = graph.run();
    interrogation_sent_end = events[e4].end_us;
    ExchangeTrace trace;
    trace.events = std::move(events);
    if (responds) {
      trace.verdict = responder.credential == interrogator.credential ? Verdict::kFriend
                                                                      : Verdict::kFoe;
      trace.makespan_us = makespan_of(trace.events);
      trace.response_payload = responder.response_payload;
    } else {
      const std::int64_t timeout =
          options.timeout_us >= 0 ? options.timeout_us : 2 * (b.t5_us + b.t6_us);
      trace.verdict = Verdict::kNoResponse;
      trace.makespan_us = std::max(makespan_of(trace.events), interrogation_sent_end + timeout);
    }
    return trace;
  }

  // ISAC: the interrogation rides on the initial emission, so decoding on
  // the transponder overlaps echo processing on the interrogator.
  const auto e1 = graph.add("t1", kI, b.t1_us, {});
  const auto e2 = graph.add("t2", kI, b.t2_us, {e1});
  const auto e3 = graph.add("t3", kI, b.t3_us, {e2});
  ExchangeTrace trace;
  if (responds) {
    const auto e5 = graph.add("t5", kT, b.t5_us, {e1});
    const auto e6 = graph.add("t6", kI, b.t6_us, {e3, e5});
    graph.add("t7", kI, b.t7_us, {e6});
    trace.events = graph.run();
    trace.verdict = responder.credential == interrogator.credential ? Verdict::kFriend
                                                                    : Verdict::kFoe;
    trace.makespan_us = makespan_of(trace.events);
    trace.response_payload = responder.response_payload;
  } else {
    trace.events = graph.run();
    interrogation_sent_end = trace.events[e1].end_us;
    const std::int64_t timeout =
        options.timeout_us >= 0 ? options.timeout_us : 2 * (b.t5_us + b.t6_us);
    trace.verdict = Verdict::kNoResponse;
    trace.makespan_us = std::max(makespan_of(trace.events), interrogation_sent_end + timeout);
  }
  return trace;
}

void write_trace_csv(const ExchangeTrace& trace, std::ostream& os) {
  os << "event,actor,start_us,end_us\n";
  for (const TraceEvent& e : trace.events) {
    os << e.label << ',' << to_string(e.actor) << ',' << e.start_us << ',' << e.end_us << '\n';
  }
}

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::kFriend: return "friend";
    case Verdict::kFoe: return "foe";
    case Verdict::kNoResponse: return "no-response";
  }
  return "unknown";
}

const char* to_string(Actor a) {
  return a == Actor::kInterrogator ? "interrogator" : "transponder";
}

}  // namespace isacsim::iff
