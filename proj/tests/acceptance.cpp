#include "betabern/suite/criteria.hpp"

#include <iostream>

int main() {
  int failed = 0;
  for (const auto& criterion : bb::suite::all_criteria()) {
    bb::suite::CriterionResult r;
    try {
      r = criterion();
    } catch (const std::exception& e) {
      r.detail = std::string("exception: ") + e.what();
    }
    std::cout << bb::suite::to_line(r) << std::endl;
    failed += !r.pass();
  }
  return failed == 0 ? 0 : 1;
}
