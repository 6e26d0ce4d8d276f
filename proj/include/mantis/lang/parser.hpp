#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "mantis/error.hpp"
#include "mantis/lang/ast.hpp"
#include "mantis/lang/sema.hpp"

namespace mantis::lang {

class SyntaxError : public UserError {
public:
  SyntaxError(SourceLoc loc, const std::string &message);
  SourceLoc loc() const { return loc_; }

private:
  SourceLoc loc_;
};

// Static-check failure raised by parse(); carries every diagnostic.
class CheckError : public UserError {
public:
  explicit CheckError(std::vector<Diagnostic> diagnostics);
  const std::vector<Diagnostic> &diagnostics() const { return diagnostics_; }

private:
  std::vector<Diagnostic> diagnostics_;
};

// Parses MiniImp source without running static checks.
Program parse_unchecked(std::string_view source);

// Parses and checks; throws SyntaxError or CheckError.
Program parse(std::string_view source);

Program parse_file(const std::string &path);

} // namespace mantis::lang
