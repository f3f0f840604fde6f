#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

namespace isacsim::iff {

/// The seven stage durations of one IFF exchange, on an integer microsecond
/// clock so discrete-event and closed-form results can be compared exactly.
///
///   t1 send sensing/ISAC signal    t2 receive echoes
///   t3 detect unknown node         t4 send interrogation
///   t5 decode interrogation        t6 receive decoded response
///   t7 implement IFF verdict
struct TimingBudget {
  std::int64_t t1_us{0};
  std::int64_t t2_us{0};
  std::int64_t t3_us{0};
  std::int64_t t4_us{0};
  std::int64_t t5_us{0};
  std::int64_t t6_us{0};
  std::int64_t t7_us{0};

  static TimingBudget from_ms(double t1, double t2, double t3, double t4, double t5, double t6,
                              double t7) {
    const auto us = [](double ms) {
      if (!(ms >= 0.0) || !std::isfinite(ms))
        throw std::invalid_argument("TimingBudget: stage durations must be finite and >= 0");
      return static_cast<std::int64_t>(std::llround(ms * 1000.0));
    };
    return TimingBudget{us(t1), us(t2), us(t3), us(t4), us(t5), us(t6), us(t7)};
  }

  bool operator==(const TimingBudget&) const = default;
};

inline void validate(const TimingBudget& b) {
  for (std::int64_t t : {b.t1_us, b.t2_us, b.t3_us, b.t4_us, b.t5_us, b.t6_us, b.t7_us}) {
    if (t < 0) throw std::invalid_argument("TimingBudget: stage durations must be >= 0");
  }
}

inline double to_ms(std::int64_t us) { return static_cast<double>(us) / 1000.0; }

/// Serial pipeline: every stage runs back to back.
inline std::int64_t separated_iff_time_us(const TimingBudget& b) {
  validate(b);
  return b.t1_us + b.t2_us + b.t3_us + b.t4_us + b.t5_us + b.t6_us + b.t7_us;
}

/// ISAC pipeline: echo processing and interrogation decoding run in
/// parallel after the shared emission.
inline std::int64_t isac_iff_time_us(const TimingBudget& b) {
  validate(b);
  return b.t1_us + std::max(b.t2_us + b.t3_us, b.t5_us) + b.t6_us + b.t7_us;
}

/// Relative IFF-time reduction (T_sep - T_isac) / T_sep, evaluated from the
/// two pipeline totals.
inline double time_reduction_ratio(const TimingBudget& b) {
  const std::int64_t sep = separated_iff_time_us(b);
  if (sep <= 0) throw std::invalid_argument("time_reduction_ratio: total separated time must be > 0");
  const std::int64_t isac = isac_iff_time_us(b);
  return static_cast<double>(sep - isac) / static_cast<double>(sep);
}

struct ReductionPoint {
  std::int64_t t5_us{0};
  std::int64_t t7_us{0};
  double rho_t{0};
};

/// Cartesian sweep of the reduction ratio over decode and verdict times with
/// transmission stages at zero; rows ordered by (t7, t5).
inline std::vector<ReductionPoint> sweep_reduction(std::int64_t t3_us,
                                                   std::span<const std::int64_t> t5_grid_us,
                                                   std::span<const std::int64_t> t7_grid_us) {
  if (t5_grid_us.empty() || t7_grid_us.empty())
    throw std::invalid_argument("sweep_reduction: grids must be non-empty");
  std::vector<ReductionPoint> table;
  table.reserve(t5_grid_us.size() * t7_grid_us.size());
  for (std::int64_t t7 : t7_grid_us) {
    for (std::int64_t t5 : t5_grid_us) {
      TimingBudget b;
      b.t3_us = t3_us;
      b.t5_us = t5;
      b.t7_us = t7;
      table.push_back(ReductionPoint{t5, t7, time_reduction_ratio(b)});
    }
  }
  return table;
}

struct TotalIdentificationTime {
  std::int64_t separated_us{0};
  std::int64_t isac_us{0};
};

/// Total delay of `interactions` back-to-back exchanges under each pipeline.
inline TotalIdentificationTime total_identification_time(const TimingBudget& b, int interactions) {
  if (interactions < 1)
    throw std::invalid_argument("total_identification_time: interactions must be >= 1");
  return TotalIdentificationTime{interactions * separated_iff_time_us(b),
                                 interactions * isac_iff_time_us(b)};
}

}  // namespace isacsim::iff
