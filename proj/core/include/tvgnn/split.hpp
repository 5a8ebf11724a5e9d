#pragma once

#include <string_view>
#include <vector>

#include "tvgnn/dates.hpp"

namespace tvgnn::data {

enum class SplitTag { Train, Validation, Test };

std::string_view to_string(SplitTag tag);

/// Years before `validation_year` train, years in [validation_year,
/// test_year) validate, the rest test.
struct SplitBoundaries {
  int validation_year = 2016;
  int test_year = 2017;
};

struct TaggedQuarter {
  Quarter quarter;
  SplitTag split = SplitTag::Train;
};

/// Tags each quarter by year. Throws ConfigError when the quarters span
/// fewer than three calendar years or any split comes out empty.
std::vector<TaggedQuarter> split_by_time(std::vector<Quarter> quarters,
                                         const SplitBoundaries& bounds = {});

SplitTag tag_for(const Quarter& q, const SplitBoundaries& bounds);

}  // namespace tvgnn::data
