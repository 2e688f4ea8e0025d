#pragma once

#include <doctest.h>

#include "eas/model.hpp"

namespace doctest {
template <>
struct StringMaker<eas::ModelIndexSet> {
  static String convert(const eas::ModelIndexSet& m) { return m.to_string().c_str(); }
};
}  // namespace doctest
