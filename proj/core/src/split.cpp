#include "tvgnn/split.hpp"

#include <algorithm>
#include <set>
#include <string>

#include "tvgnn/errors.hpp"

namespace tvgnn::data {

std::string_view to_string(SplitTag tag) {
  switch (tag) {
    case SplitTag::Train: return "train";
    case SplitTag::Validation: return "val";
    case SplitTag::Test: return "test";
  }
  return "?";
}

SplitTag tag_for(const Quarter& q, const SplitBoundaries& bounds) {
  if (q.year < bounds.validation_year) return SplitTag::Train;
  if (q.year < bounds.test_year) return SplitTag::Validation;
  return SplitTag::Test;
}

std::vector<TaggedQuarter> split_by_time(std::vector<Quarter> quarters, const SplitBoundaries& bounds) {
  if (bounds.test_year <= bounds.validation_year) {
    throw ConfigError("split: test year must come after the validation year");
  }
  std::sort(quarters.begin(), quarters.end());
  quarters.erase(std::unique(quarters.begin(), quarters.end()), quarters.end());
  std::set<int> years;
  for (const auto& q : quarters) years.insert(q.year);
  if (years.size() < 3) {
    throw ConfigError("split: quarters span " + std::to_string(years.size()) +
                      " year(s); at least 3 are required");
  }
  std::vector<TaggedQuarter> out;
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& q : quarters) {
    const auto tag = tag_for(q, bounds);
    ++counts[static_cast<int>(tag)];
    out.push_back({q, tag});
  }
  for (int s = 0; s < 3; ++s) {
    if (counts[s] == 0) {
      throw ConfigError("split: the " + std::string(to_string(static_cast<SplitTag>(s))) +
                        " split is empty under validation_year=" + std::to_string(bounds.validation_year) +
                        ", test_year=" + std::to_string(bounds.test_year));
    }
  }
  return out;
}

}  // namespace tvgnn::data
