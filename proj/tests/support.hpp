#pragma once

#include <random>
#include <string>

#include <doctest.h>

#include "lefgpd/error.hpp"

// Runs `expr` and checks it throws lefgpd::Error of the given kind.
#define CHECK_ERROR_KIND(expr, expected_kind)                                  \
  do {                                                                         \
    bool thrown_ = false;                                                      \
    try {                                                                      \
      (void)(expr);                                                            \
    } catch (const lefgpd::Error& e_) {                                        \
      thrown_ = true;                                                          \
      CHECK_MESSAGE(e_.kind() == (expected_kind), e_.what());                  \
    }                                                                          \
    CHECK_MESSAGE(thrown_, "expected " << lefgpd::to_string(expected_kind));   \
  } while (0)

namespace testing {

inline std::mt19937_64& rng() {
  static std::mt19937_64 engine(20240917);
  return engine;
}

}  // namespace testing
