#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "isacsim/iff.hpp"

namespace isacsim::iff {

enum class Allegiance { kFriend, kFoe, kUnresponsive };
enum class Actor { kInterrogator, kTransponder };
enum class Verdict { kFriend, kFoe, kNoResponse };
enum class PipelineVariant { kSeparated, kIsac };

/// One participant in an exchange. The credential is an opaque token; the
/// interrogator accepts a responder whose credential matches its own
/// expected code. Transponder-side timing overrides replace the budget's
/// decode (t5) and response (t6) durations when set.
struct IffNode {
  std::string id;
  Allegiance allegiance{Allegiance::kFriend};
  std::string credential;
  std::optional<std::int64_t> decode_us;    // transponder decode time override
  std::optional<std::int64_t> respond_us;   // transponder response send override
  std::string response_payload;             // opaque location payload carried on the response
};

struct TraceEvent {
  std::string label;  // one of t1..t7
  Actor actor{Actor::kInterrogator};
  std::int64_t start_us{0};
  std::int64_t end_us{0};
};

/// Timeline of one exchange as produced by the event engine. The makespan is
/// read from event end times, never from the closed forms.
struct ExchangeTrace {
  std::vector<TraceEvent> events;
  Verdict verdict{Verdict::kNoResponse};
  std::int64_t makespan_us{0};
  std::optional<std::string> response_payload;
};

struct ExchangeOptions {
  /// Wait for a response before declaring no-response; <0 selects the
  /// default 2 * (t5 + t6).
  std::int64_t timeout_us{-1};
};

ExchangeTrace simulate_exchange(PipelineVariant variant, const TimingBudget& budget,
                                const IffNode& interrogator, const IffNode& responder,
                                const ExchangeOptions& options = {});

/// Trace export, columns: event, actor, start_us, end_us.
void write_trace_csv(const ExchangeTrace& trace, std::ostream& os);

const char* to_string(Verdict v);
const char* to_string(Actor a);

}  // namespace isacsim::iff
