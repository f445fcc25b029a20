#pragma once

#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "uavnoma/csv.hpp"

namespace testing {

inline uavnoma::csv::Table fixture(const std::string& name) {
  return uavnoma::csv::read_table(std::string(UAVNOMA_FIXTURES) + "/" + name);
}

inline bool rel_close(double got, double want, double tol) {
  if (got == want) return true;
  const double scale = std::max(std::abs(got), std::abs(want));
  return std::abs(got - want) <= tol * scale;
}

#define CHECK_REL(got, want, tol)                                                  \
  do {                                                                             \
    const double got_ = (got), want_ = (want);                                     \
    INFO("got " << got_ << " want " << want_ << " rel tol " << (tol));             \
    CHECK(::testing::rel_close(got_, want_, (tol)));                               \
  } while (0)

inline std::vector<double> numbers(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  double v;
  while (in >> v) out.push_back(v);
  return out;
}

}  // namespace testing
