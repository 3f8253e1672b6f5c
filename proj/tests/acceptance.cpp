// Acceptance run: one line per criterion, failing checks listed beneath it.
//
// Exits 0 once every experiment has run and reported, so a red criterion
// shows up in the log without hiding the others; --strict exits 1 instead.
// An experiment that throws is reported as FAIL with its diagnostic.
#include <chrono>
#include <iostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "qhl/error.hpp"
#include "qhl/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  std::string out = "acceptance-out";
  int jobs = 1;
  bool strict = false;
  std::vector<std::string> only;
  app.add_option("--out", out, "report directory")->capture_default_str();
  app.add_option("--jobs", jobs)->check(CLI::PositiveNumber);
  app.add_option("--only", only)->check(CLI::IsMember(qhl::experiment_names()));
  app.add_flag("--strict", strict, "exit 1 if any criterion fails");
  CLI11_PARSE(app, argc, argv);

  const auto names = only.empty() ? qhl::experiment_names() : only;
  int failed = 0;
  for (const auto& name : names) {
    const auto t0 = std::chrono::steady_clock::now();
    qhl::ExperimentConfig c = qhl::default_config(name);
    c.jobs = jobs;
    std::string status, detail;
    int criterion = 0;
    try {
      const auto r = qhl::run_experiment(c);
      qhl::write_report(r, out);
      criterion = r.criterion;
      status = r.passed() ? "PASS" : "FAIL";
      detail = fmt::format("{}/{} checks", r.checks.size() - r.failed_count(), r.checks.size());
      for (const auto& k : r.checks)
        if (!k.passed) detail += fmt::format("\n      failed: {} = {} (want {})", k.name, qhl::num(k.value), k.bound);
    } catch (const std::exception& e) {
      status = "FAIL";
      detail = fmt::format("error: {}", e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failed += status != "PASS";
    std::cout << fmt::format("[{}] criterion {:2} {:<22} {:.1f} s  {}\n", status, criterion, name, secs, detail)
              << std::flush;
  }
  std::cout << fmt::format("acceptance: {} of {} criteria passed; reports in {}\n", names.size() - failed,
                           names.size(), out);
  return strict && failed ? 1 : 0;
}
