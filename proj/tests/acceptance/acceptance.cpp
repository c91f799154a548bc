// Copyright 2026 The dpeq Authors
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


// Full-size acceptance run: one PASS/FAIL line per criterion. Exits nonzero
// on any failure not listed as documented.

#include <iostream>

#include "dpeq/checks.hpp"

int main() {
  dpeq::CheckOptions options;
  options.reduced = false;
  const auto results = dpeq::run_checks(options, &std::cout);
  std::size_t failed = 0;
  for (const auto& r : results) failed += r.passed ? 0 : 1;
  const std::size_t blocking = dpeq::blocking_failures(results);
  std::cout << (results.size() - failed) << "/" << results.size() << " criteria passed, "
            << (failed - blocking) << " documented failure(s), " << blocking << " blocking\n";
  return blocking == 0 ? 0 : 1;
}
