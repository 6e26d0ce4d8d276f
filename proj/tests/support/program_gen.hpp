#pragma once

// Random generator of terminating, well-typed MiniImp programs for property
// tests. Programs read a bounded prefix of their input, use every feature
// kind (loops, branches, calls, rescue, scalar and array variables) and never
// hit a runtime error: indices are reduced modulo the array length, divisors
// are nonzero constants, loop bounds are small and recursion is bounded.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "mantis/lang/interpreter.hpp"

namespace mantis::testgen {

class ProgramGen {
public:
  // Without recursion the call graph is acyclic (helpers only call earlier
  // helpers).
  explicit ProgramGen(std::uint64_t seed, bool recursion = true) : rng_(seed), recursion_(recursion) {}

  std::string program() {
    out_.clear();
    helpers_ = 0;
    const int nglobals = 2 + pick(3);
    globals_.clear();
    for (int i = 0; i < nglobals; ++i) {
      globals_.push_back("g" + std::to_string(i));
      out_ += "global int g" + std::to_string(i);
      if (coin()) out_ += " = " + std::to_string(pick(5));
      out_ += ";\n";
    }
    out_ += "global float gf = 0.5;\n";
    out_ += "global int[8] garr;\n";

    if (recursion_) {
      out_ += "fn rec(int n, int acc) -> int {\n";
      out_ += "  if (n <= 0) { return acc; }\n";
      out_ += "  g0 = g0 + 1;\n";
      out_ += "  if (n % 3 == 2) { garr[n % 8] = acc; }\n";
      out_ += "  return rec(n - 1, acc + n % 4);\n}\n";
    }

    const int nhelpers = 1 + pick(3);
    for (int h = 0; h < nhelpers; ++h) {
      scopes_ = {{"a", "b"}};
      readonly_ = {};
      depth_ = 0;
      in_helper_ = true;
      out_ += "fn h" + std::to_string(h) + "(int a, int b, int[] arr) -> int {\n";
      block_body(2 + pick(4), 1);
      out_ += "  return " + int_expr(2) + ";\n}\n";
      ++helpers_;
    }

    scopes_ = {{}};
    readonly_ = {};
    depth_ = 0;
    in_helper_ = false;
    out_ += "fn main() {\n";
    out_ += "  int[] local = new int[8];\n";
    block_body(4 + pick(8), 1);
    out_ += "  print(" + int_expr(2) + ");\n";
    out_ += "}\n";
    return out_;
  }

  lang::InputRecord input() {
    lang::InputRecord r;
    const int n = pick(14);
    for (int i = 0; i < n; ++i)
      r.values.push_back(static_cast<double>(pick(10)));
    return r;
  }

private:
  std::mt19937_64 rng_;
  bool recursion_ = true;
  std::string out_;
  std::vector<std::string> globals_;
  std::vector<std::vector<std::string>> scopes_;
  std::vector<std::string> readonly_;
  int depth_ = 0;
  int helpers_ = 0;
  int fresh_ = 0;
  bool in_helper_ = false;

  int pick(int n) { return static_cast<int>(rng_() % static_cast<std::uint64_t>(n)); }
  bool coin() { return pick(2) == 0; }

  std::vector<std::string> readable() const {
    std::vector<std::string> v = globals_;
    for (const auto &s : scopes_)
      v.insert(v.end(), s.begin(), s.end());
    v.insert(v.end(), readonly_.begin(), readonly_.end());
    return v;
  }

  std::vector<std::string> writable() const {
    std::vector<std::string> v = globals_;
    for (const auto &s : scopes_)
      v.insert(v.end(), s.begin(), s.end());
    return v;
  }

  std::string array_name() { return in_helper_ ? "arr" : (coin() ? "local" : "garr"); }

  std::string index_expr() { return "(" + int_expr(1) + " % 8 + 8) % 8"; }

  std::string int_expr(int budget) {
    if (budget <= 0 || pick(3) == 0) {
      auto vars = readable();
      if (vars.empty() || pick(3) == 0) return std::to_string(pick(7));
      return vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))];
    }
    switch (pick(9)) {
    case 0: return "(" + int_expr(budget - 1) + " + " + int_expr(budget - 1) + ")";
    case 1: return "(" + int_expr(budget - 1) + " - " + int_expr(budget - 1) + ")";
    case 2: return "(" + int_expr(budget - 1) + " * " + std::to_string(pick(3)) + ")";
    case 3: return "(" + int_expr(budget - 1) + " % " + std::to_string(2 + pick(4)) + ")";
    case 4: return "(" + int_expr(budget - 1) + " / " + std::to_string(1 + pick(3)) + ")";
    case 5: return array_name() + "[" + index_expr() + "]";
    case 6:
      if (helpers_ > 0 && depth_ < 3)
        return "h" + std::to_string(pick(helpers_)) + "(" + int_expr(budget - 1) + ", " +
               int_expr(budget - 1) + ", " + array_name() + ")";
      return int_expr(budget - 1);
    case 7:
      if (!in_helper_ && recursion_) return "rec(" + int_expr(budget - 1) + " % 6, " + int_expr(budget - 1) + ")";
      return int_expr(budget - 1);
    default: return "toInt(gf * " + std::to_string(1 + pick(3)) + ".0)";
    }
  }

  std::string bool_expr() {
    static const char *rel[] = {"<", "<=", ">", ">=", "==", "!="};
    std::string e = "(" + int_expr(1) + " " + rel[pick(6)] + " " + int_expr(1) + ")";
    if (pick(4) == 0) e = "(" + e + (coin() ? " && " : " || ") + bool_expr() + ")";
    if (pick(6) == 0) e = "!" + e;
    return e;
  }

  void indent(int level) { out_.append(static_cast<std::size_t>(2 * level), ' '); }

  void block_body(int n, int level) {
    for (int i = 0; i < n; ++i)
      stmt(level);
  }

  void nested(int level, int n) {
    scopes_.emplace_back();
    ++depth_;
    block_body(n, level + 1);
    --depth_;
    scopes_.pop_back();
  }

  void stmt(int level) {
    const bool can_nest = depth_ < 3;
    const int choice = pick(can_nest ? 15 : 8);
    indent(level);
    switch (choice) {
    case 0:
    case 1: {
      const std::string name = "v" + std::to_string(fresh_++);
      out_ += "int " + name + " = " + int_expr(2) + ";\n";
      scopes_.back().push_back(name);
      return;
    }
    case 2:
    case 3: {
      auto vars = writable();
      out_ += vars[static_cast<std::size_t>(pick(static_cast<int>(vars.size())))] + " = " +
              int_expr(2) + ";\n";
      return;
    }
    case 4:
      out_ += array_name() + "[" + index_expr() + "] = " + int_expr(2) + ";\n";
      return;
    case 5:
      out_ += "work(" + int_expr(1) + " % 20);\n";
      return;
    case 6:
      if (!in_helper_) {
        const std::string name = "r" + std::to_string(fresh_++);
        out_ += "int " + name + " = 0;\n";
        indent(level);
        out_ += "if (!eof()) { " + name + " = readInt(); }\n";
        scopes_.back().push_back(name);
        return;
      }
      out_ += "gf = gf + toFloat(" + int_expr(1) + ") / 4.0;\n";
      return;
    case 7:
      out_ += "print(" + int_expr(1) + ");\n";
      return;
    case 8:
    case 9:
      out_ += "if (" + bool_expr() + ") {\n";
      nested(level, 1 + pick(3));
      indent(level);
      if (coin()) {
        out_ += "} else {\n";
        nested(level, 1 + pick(3));
        indent(level);
      }
      out_ += "}\n";
      return;
    case 10: {
      const std::string i = "i" + std::to_string(fresh_++);
      out_ += "for " + i + " in 0.." + int_expr(1) + " % 6 {\n";
      readonly_.push_back(i);
      nested(level, 1 + pick(3));
      readonly_.pop_back();
      indent(level);
      out_ += "}\n";
      return;
    }
    case 11: {
      const std::string w = "w" + std::to_string(fresh_++);
      out_ += "int " + w + " = 0;\n";
      indent(level);
      out_ += "while (" + w + " < " + int_expr(1) + " % 5) {\n";
      indent(level + 1);
      out_ += w + " = " + w + " + 1;\n";
      readonly_.push_back(w);
      nested(level, 1 + pick(3));
      readonly_.pop_back();
      indent(level);
      out_ += "}\n";
      return;
    }
    case 12:
      out_ += "try {\n";
      nested(level, 1 + pick(2));
      indent(level + 1);
      out_ += "if (" + bool_expr() + ") { fail(" + std::to_string(1 + pick(3)) + "); }\n";
      nested(level, pick(2));
      indent(level);
      out_ += "} rescue {\n";
      nested(level, 1 + pick(2));
      indent(level);
      out_ += "}\n";
      return;
    case 13:
      if (helpers_ > 0) {
        out_ += "g" + std::to_string(pick(static_cast<int>(globals_.size()))) + " = h" +
                std::to_string(pick(helpers_)) + "(" + int_expr(1) + ", " + int_expr(1) + ", " +
                array_name() + ");\n";
        return;
      }
      out_ += "work(1);\n";
      return;
    default:
      if (in_helper_) {
        out_ += "if (" + bool_expr() + ") { fail(9); }\n";
        return;
      }
      if (recursion_) out_ += "try { g1 = rec(" + int_expr(1) + " % 7, 1); } rescue { g1 = 0; }\n";
      else out_ += "try { g1 = h0(" + int_expr(1) + ", 1, garr); } rescue { g1 = 0; }\n";
      return;
    }
  }
};

} // namespace mantis::testgen
