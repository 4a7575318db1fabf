#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cmseq {

/// Runs one CLI command. `args` holds the arguments after the program
/// name in natural order, e.g. {"induce", "--in", "m.json", "--out",
/// "c.json"}. Returns the process exit status: 0 on success, 1 on a
/// validation or input failure, 2 on a numerical failure. The default
/// tolerance is 1e-8, overridden by the CMSEQ_TOL environment variable;
/// an explicit --tol flag wins over both.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace cmseq
