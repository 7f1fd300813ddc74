// Runs every acceptance check at its stated tolerance; one line per check.
#include <cstdio>

#include "smilewings/verify.hpp"

int main() {
  using namespace smilewings;
  const verify::Options options;
  int failed = 0;
  for (const auto& c : verify::catalog()) {
    const auto r = verify::run_check(c.id, options);
    std::printf("%s\n", verify::summary_line(r).c_str());
    std::fflush(stdout);
    if (!r.passed()) ++failed;
  }
  std::printf("%d of %zu acceptance checks passed\n", static_cast<int>(verify::catalog().size()) - failed,
              verify::catalog().size());
  return failed == 0 ? 0 : 1;
}
