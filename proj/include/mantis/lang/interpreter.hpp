#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "mantis/error.hpp"
#include "mantis/lang/ast.hpp"

namespace mantis::lang {

struct ArrayObject;

// A runtime value: int, float, bool or a reference to an array.
class Value {
public:
  Value() : v_(std::int64_t{0}) {}
  static Value of_int(std::int64_t i) { return Value(i); }
  static Value of_float(double d) { return Value(d); }
  static Value of_bool(bool b) { return Value(b); }
  static Value of_array(std::shared_ptr<ArrayObject> a) { return Value(std::move(a)); }
  static Value default_of(Type t);

  bool is_int() const { return std::holds_alternative<std::int64_t>(v_); }
  bool is_float() const { return std::holds_alternative<double>(v_); }
  bool is_bool() const { return std::holds_alternative<bool>(v_); }
  bool is_array() const { return std::holds_alternative<std::shared_ptr<ArrayObject>>(v_); }

  std::int64_t as_int() const { return std::get<std::int64_t>(v_); }
  double as_float() const { return std::get<double>(v_); }
  bool as_bool() const { return std::get<bool>(v_); }
  const std::shared_ptr<ArrayObject> &as_array() const {
    return std::get<std::shared_ptr<ArrayObject>>(v_);
  }

  // Numeric view used for feature vectors: bools map to 0/1.
  double to_number() const;
  std::string to_string() const;

  // Scalars compare by value (ints and floats never compare equal to each
  // other), arrays by identity.
  friend bool operator==(const Value &a, const Value &b) { return a.v_ == b.v_; }

private:
  template <typename T> explicit Value(T x) : v_(std::move(x)) {}
  std::variant<std::int64_t, double, bool, std::shared_ptr<ArrayObject>> v_;
};

struct ArrayObject {
  BaseType elem = BaseType::Int;
  std::vector<Value> items;
};

// Values consumed, left to right, by read()/readInt().
struct InputRecord {
  std::vector<double> values;
};

InputRecord parse_input(std::string_view text);
InputRecord read_input_file(const std::string &path);
std::string format_input(const InputRecord &input);

struct CostConfig {
  std::uint64_t statement = 1;
  std::uint64_t loop_iteration = 1;
  std::uint64_t work_unit = 1;
  // Runs whose cost exceeds this are aborted with a RuntimeError.
  std::uint64_t max_cost = 2'000'000'000;
  int max_call_depth = 2000;
};

struct RunResult {
  std::vector<Value> outputs;
  std::uint64_t cost = 0;
  bool trapped = false;
  std::int64_t trap_code = 0;
  std::size_t consumed_inputs = 0;
  // Final values of every scalar global; this is the side channel through
  // which instrumented runs report feature values.
  std::map<std::string, Value> globals;
  // Executions per probe site (indexed by Stmt::probe_site).
  std::vector<std::uint64_t> probe_hits;

  friend bool operator==(const RunResult &, const RunResult &) = default;
};

// Division by zero, out-of-bounds indexing, reading past the end of input,
// exceeding the cost budget or call depth. Distinct from `fail`, which
// traps (RunResult::trapped) instead.
class RuntimeError : public Error {
public:
  RuntimeError(SourceLoc loc, const std::string &message);
  SourceLoc loc() const { return loc_; }

private:
  SourceLoc loc_;
};

// Executes `main` of a checked program. Every executed non-probe statement
// costs `statement`, every loop iteration `loop_iteration`, and work(e)
// adds e * work_unit. Expression evaluation is free.
RunResult interpret(const Program &program, const InputRecord &input,
                    const CostConfig &costs = {});

} // namespace mantis::lang
