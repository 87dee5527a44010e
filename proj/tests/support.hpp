#pragma once

#include <functional>

#include "doctest.h"

#include "sociallearn/error.hpp"

// Passes when expr throws sociallearn::Error carrying `expected`.
#define CHECK_THROWS_CODE(expr, expected)                          \
  do {                                                             \
    bool thrown_ = false;                                          \
    try {                                                          \
      (void)(expr);                                                \
    } catch (const ::sociallearn::Error& e_) {                     \
      thrown_ = true;                                              \
      CHECK_MESSAGE(e_.code() == (expected), e_.what());           \
    }                                                              \
    CHECK_MESSAGE(thrown_, "expected an exception from " #expr);   \
  } while (false)
