#pragma once

#include <gtest/gtest.h>

#include "fixture_data.hpp"

namespace fixtures {

/// Kind of the schl::Error thrown by f; records a failure if nothing is thrown.
inline schl::ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const schl::Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return schl::ErrorKind::InvalidArgument;
}

}  // namespace fixtures
