#pragma once

#include <iosfwd>
#include <memory>
#include <string>

#include "qecsp/io.hpp"
#include "qecsp/scheme.hpp"

namespace qecsp {

enum ExitCode { kExitTrue = 0, kExitFalse = 1, kExitError = 2, kExitOracleMismatch = 3 };

// "auto" gives the automatic choice. Otherwise constant:<d>, or
// setfn|nu|maltsev followed by a name declared in the instance, a builtin
// name, a file of op/setfn lines, or an inline table as in scheme ids.
SchemeChoice resolve_scheme(const std::string& request, const Instance& inst);

// Oracle variable cap from QECSP_ORACLE_LIMIT, default 14.
int oracle_limit();

// Whole command line; argv[0] is the program name.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qecsp
