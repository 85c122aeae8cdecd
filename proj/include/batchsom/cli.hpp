#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "batchsom/config.hpp"
#include "batchsom/errors.hpp"

namespace batchsom::cli {

enum class Role { Local, Coordinator, Worker, Bench };

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitInput = 2, kExitRuntime = 3 };

class UsageError : public Error {
public:
    using Error::Error;
};

/// Thrown by parse_args for -h/--help; carries the help text.
class HelpRequested : public Error {
public:
    using Error::Error;
};

struct CliInvocation {
    Role role = Role::Local;
    std::string inputFile;
    std::string outputPrefix;
    std::string initialCodebook;
    RawConfig config;
    std::uint32_t columns = 50;
    std::uint32_t rows = 50;
    /// 0 selects the number of logical cores.
    std::size_t threads = 0;

    /// "host:port" to listen on (coordinator) or connect to (worker).
    std::string endpoint;
    std::uint32_t workers = 1;
    std::uint32_t rank = UINT32_MAX;
    double timeoutSeconds = 300.0;

    std::string benchSpec;
    std::string benchCsv;
    std::string benchDat;
};

/// `args` excludes the program name. A leading "coordinator", "worker" or
/// "bench" selects that role; anything else is a local run.
CliInvocation parse_args(const std::vector<std::string>& args);

/// Executes an invocation; progress goes to `out`, diagnostics to `err`.
int run(const CliInvocation& invocation, std::ostream& out, std::ostream& err);

/// parse_args + run with exit-code mapping.
int main_entry(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Exit code for an exception escaping `run`.
int exit_code_for(const std::exception& e);

}  // namespace batchsom::cli
