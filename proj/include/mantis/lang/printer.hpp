#pragma once

#include <string>

#include "mantis/lang/ast.hpp"

namespace mantis::lang {

// Canonical MiniImp source. parse(to_source(p)) yields a program that
// prints identically.
std::string to_source(const Program &program);
std::string to_source(const Expr &e);

// Shortest round-trip spelling of a float literal (always contains '.' or
// an exponent).
std::string format_float(double v);

} // namespace mantis::lang
