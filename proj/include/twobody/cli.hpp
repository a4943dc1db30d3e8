#pragma once

// Entry point of the `twobody` tool, callable in-process.
//
// Exit codes: 0 success, 1 usage error, 2 solver failure or partial result.

#include <iostream>
#include <string>
#include <vector>

#include "twobody/plot.hpp"
#include "twobody/scenario.hpp"

namespace twobody {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitSolver = 2 };

inline int run_cli(const std::vector<std::string>& args, std::ostream& err = std::cerr) {
  ScenarioSpec spec;
  try {
    spec = parse_args(args);
  } catch (const HelpRequested& h) {
    std::cout << h.what();
    return kExitOk;
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DomainError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    const OutputTable table = run(spec);
    write_table(table, spec.format, spec.out);
    if (spec.plot) render_plot(table, *spec.plot);
    if (table.metadata.value("partial", false)) {
      err << "warning: partial result";
      for (const auto& d : table.metadata["solver"]["diagnostics"]) err << "; " << d.get<std::string>();
      err << "\n";
      return kExitSolver;
    }
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return kExitSolver;
  } catch (const DomainError& e) {
    err << "solver error: " << e.what() << "\n";
    return kExitSolver;
  }
  return kExitOk;
}

}  // namespace twobody
