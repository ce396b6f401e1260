#pragma once

#include <string>
#include <vector>

#include "qecsp/formula.hpp"
#include "qecsp/polymorphism.hpp"
#include "qecsp/reductions.hpp"

namespace qecsp {

// Parse errors carry "line L, column C: ..." in what().
class ParseError : public Error {
 public:
  ParseError(int line, int column, const std::string& msg);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

struct Instance {
  Formula formula;
  std::vector<Operation> operations;
  std::vector<SetFunction> set_functions;
  std::vector<std::string> warnings;
};

// Line grammar, '#' starts a comment:
//   domain <k>
//   relation <name> <arity> { (v,...) ... }
//   exists <vars...> | forall <vars...>        prefix order
//   constraint [y=d, ...] <name>(<xvars...>)
//   standard <name>(<vars...>)                  universal arguments allowed
//   op <name> <arity> : <values...>            table in lexicographic order
//   setfn <name> : <mask>-><value> ...
Instance parse_instance(const std::string& text);
Instance load_instance(const std::string& path);

// Operations and set functions only (plus an optional domain line); the
// domain defaults to default_domain.
struct OperationFile {
  std::vector<Operation> operations;
  std::vector<SetFunction> set_functions;
};
OperationFile parse_operations(const std::string& text, int default_domain);

// Canonical text: relations in language order, blocks in prefix order,
// constraints in formula order. Variables outside the prefix are dropped.
std::string serialize_instance(const Formula& phi);
std::string serialize_operation(const Operation& op);
std::string serialize_set_function(const SetFunction& f);

// SHA-256 of serialize_instance, lowercase hex.
std::string formula_digest(const Formula& phi);

// DIMACS "p cnf" input.
Cnf parse_cnf(const std::string& text);
// QDIMACS-style: "a"/"e" lines give the prefix; free variables join an
// outermost existential block. Variables are named v1, v2, ...
QuantifiedCnf parse_qcnf(const std::string& text);

std::string read_file(const std::string& path);

}  // namespace qecsp
