// Copyright 2026 The Avalon Solver Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>

#include <boost/multiprecision/cpp_int.hpp>

namespace avalon {

using BigInt = boost::multiprecision::cpp_int;

// Lower bound on the number of public histories: each of `stages` proposal
// stages picks one of 10 teams and one of 16 majority-deciding vote vectors.
inline BigInt StateSpaceLowerBound(int stages = 25) {
  return boost::multiprecision::pow(BigInt(10 * 16), static_cast<unsigned>(stages));
}

inline std::string BoundReport() {
  const BigInt value = StateSpaceLowerBound();
  const std::string digits = value.str();
  return "(10*16)^(5*5) = 160^25 = " + digits + "\n" + "digits: " +
         std::to_string(digits.size()) + " (about 1.27e" +
         std::to_string(digits.size() - 1) + ")\n";
}

}  // namespace avalon
