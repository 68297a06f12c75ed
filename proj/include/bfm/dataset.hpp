#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "bfm/error.hpp"

namespace bfm {

enum class Status { failure_cause1, failure_cause2, failure_cause_unknown, censored };

inline bool is_failure(Status s) { return s != Status::censored; }

struct CensoredObservation {
  double time;
  Status status;
};

struct StatusCounts {
  std::size_t cause1 = 0, cause2 = 0, unknown = 0, censored = 0;
  std::size_t failures() const { return cause1 + cause2 + unknown; }
  std::size_t total() const { return failures() + censored; }
};

struct Dataset {
  std::string name;
  std::string time_unit;
  std::string cause_labels;
  std::vector<CensoredObservation> observations;
  std::vector<std::string> notes;

  StatusCounts counts() const {
    StatusCounts c;
    for (const auto& o : observations) {
      switch (o.status) {
        case Status::failure_cause1: ++c.cause1; break;
        case Status::failure_cause2: ++c.cause2; break;
        case Status::failure_cause_unknown: ++c.unknown; break;
        case Status::censored: ++c.censored; break;
      }
    }
    return c;
  }
  std::size_t size() const { return observations.size(); }

  std::vector<double> failure_times() const {
    std::vector<double> t;
    for (const auto& o : observations)
      if (is_failure(o.status)) t.push_back(o.time);
    return t;
  }
  std::vector<double> times_with(Status s) const {
    std::vector<double> t;
    for (const auto& o : observations)
      if (o.status == s) t.push_back(o.time);
    return t;
  }

  void validate() const {
    if (observations.empty()) throw DataError("dataset '" + name + "' has no observations");
    for (const auto& o : observations)
      if (!(o.time > 0.0) || !std::isfinite(o.time))
        throw DataError("dataset '" + name + "' has a nonpositive or non-finite time");
  }
};

}  // namespace bfm
