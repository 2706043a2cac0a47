#pragma once

#include <string>
#include <vector>

#include "htrace/heuristics.hpp"

namespace htrace::testing {

// Trace matrix over catalog features with the given row-major values.
inline heuristics::TraceMatrix make_matrix(const std::vector<std::string>& annotators,
                                           const std::vector<std::string>& feature_ids,
                                           const std::vector<double>& values) {
  heuristics::TraceMatrix m;
  m.annotators = annotators;
  m.example_counts.assign(annotators.size(), 1);
  for (const auto& id : feature_ids) m.columns.push_back(heuristics::find_feature(id));
  m.values = values;
  m.refresh_statistics();
  return m;
}

}  // namespace htrace::testing
