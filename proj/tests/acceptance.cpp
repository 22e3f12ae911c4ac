// One PASS/FAIL line per acceptance criterion. With an argument only that criterion runs;
// the exit status is nonzero if any selected criterion fails.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>

#include "steklov/report.hpp"
#include "steklov/verification.hpp"

using namespace steklov;

namespace {

// 10. Two runs of the full verify task give the same CSV bytes.
CheckResult check_determinism() {
  CheckResult c{10, "verify determinism"};
  auto sc = parse_scenario("name = acceptance\ntask = verify\n");
  std::ostringstream first, second;
  emit_csv(run(sc), first);
  emit_csv(run(sc), second);
  bool same = first.str() == second.str();
  std::size_t lines = 0;
  for (char ch : first.str()) lines += ch == '\n';
  c.pass = same && lines > 10;
  c.detail = std::to_string(first.str().size()) + " bytes in " + std::to_string(lines) + " lines, " +
             (same ? "identical" : "different");
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = argc > 1 ? std::atoi(argv[1]) : 0;
  if (argc > 1 && (only < 1 || only > 10)) {
    std::fprintf(stderr, "usage: %s [criterion 1..10]\n", argv[0]);
    return 1;
  }
  bool all_pass = true;
  for (int id = 1; id <= 10; ++id) {
    if (only && id != only) continue;
    auto t0 = std::chrono::steady_clock::now();
    CheckResult c;
    try {
      c = id == 10 ? check_determinism() : run_check(id);
    } catch (const std::exception& ex) {
      c = {id, "criterion " + std::to_string(id), false, {}, std::string("threw: ") + ex.what()};
    }
    double s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("criterion %2d %s  %s: %s [%.1f s]\n", id, c.pass ? "PASS" : "FAIL", c.title.c_str(),
                c.detail.c_str(), s);
    for (const auto& m : c.measures) std::printf("    %s = %.10g\n", m.id.c_str(), m.value);
    std::fflush(stdout);
    all_pass = all_pass && c.pass;
  }
  return all_pass ? 0 : 1;
}
