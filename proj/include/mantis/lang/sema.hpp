#pragma once

#include <string>
#include <vector>

#include "mantis/lang/ast.hpp"

namespace mantis::lang {

struct Diagnostic {
  SourceLoc loc;
  std::string message;
};

std::string to_string(const Diagnostic &d);

// Resolves names, assigns local slots, computes expression types and
// renumbers node ids. Returns an empty list iff the program is well formed:
// exactly one `main` taking no parameters, every called function exists with
// matching arity and argument types, every variable is declared.
std::vector<Diagnostic> check(Program &program);

// Throws CheckError if check() reports anything.
void check_or_throw(Program &program);

} // namespace mantis::lang
