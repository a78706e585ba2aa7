#pragma once

#include <string>
#include <vector>

#include "fiberrt/context.hpp"

namespace fiberrt::test {

inline std::vector<std::string> available_backends() {
  std::vector<std::string> out;
  for (const auto& info : backend_list()) out.emplace_back(info.name);
  return out;
}

}  // namespace fiberrt::test
