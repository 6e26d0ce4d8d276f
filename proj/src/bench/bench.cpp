#include "mantis/bench/bench.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <random>
#include <sstream>

#include "mantis/error.hpp"

namespace mantis::bench {

// Generated from bench/programs at configure time.
const std::map<std::string, std::string> &program_texts();

namespace {

const std::map<std::string, InputSpec> &specs() {
  static const std::map<std::string, InputSpec> s = {
      {"gridwork", {{{4, 60}, {4, 60}, {0, 9}, {0, 99}}}},
      {"gridwork2", {{{10, 200}, {1, 12}}}},
      {"readloop", {{}, 0, 50, 0, 100, true}},
      {"feedback", {{{5, 80}, {1, 20}, {0, 999}}}},
      {"fib_memo", {{{0, 6}}, 6, 6, 0, 99}},
      {"bubble_sort", {{}, 0, 40, 0, 999}},
      {"tokenizer", {{{0, 5}}, 15, 15, 0, 12}},
      {"bank", {{{0, 100}, {0, 100}}, 0, 18, 0, 100}},
      {"gcd", {{{0, 999}, {0, 999}}}},
      {"matrix", {{{0, 9}}, 25, 25, 0, 99}},
      {"collatz", {{{0, 7}}, 7, 7, 0, 999}},
      {"histogram", {{}, 0, 50, 0, 120, true}},
      {"hanoi", {{{0, 99}}}},
      {"tiny_sum", {{{0, 99}, {0, 99}}}},
      {"tiny_sign", {{{0, 99}}}},
      {"tiny_loop", {{{0, 99}}}},
      {"retry", {{{0, 9}}, 9, 9, 0, 99}},
  };
  return s;
}

} // namespace

const std::vector<Benchmark> &benchmarks() {
  static const std::vector<Benchmark> all = [] {
    std::vector<Benchmark> out;
    for (const auto &[name, text] : program_texts()) {
      auto it = specs().find(name);
      if (it == specs().end()) throw InternalError("no input shape for bench program " + name);
      out.push_back({name, text, it->second});
    }
    return out;
  }();
  return all;
}

const Benchmark &find_benchmark(const std::string &name) {
  for (const Benchmark &b : benchmarks())
    if (b.name == name) return b;
  throw UserError("unknown benchmark: " + name);
}

std::vector<lang::InputRecord> generate_inputs(const InputSpec &spec, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<lang::InputRecord> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    lang::InputRecord r;
    for (const auto &[lo, hi] : spec.prefix)
      r.values.push_back(std::uniform_int_distribution<int>(lo, hi)(rng));
    const int len = std::uniform_int_distribution<int>(spec.tail_min, spec.tail_max)(rng);
    for (int k = 0; k < len; ++k) {
      if (spec.tail_float) {
        // Two decimals keep the text form exact.
        const double v = std::uniform_real_distribution<double>(spec.tail_lo, spec.tail_hi)(rng);
        r.values.push_back(std::round(v * 100) / 100);
      } else {
        r.values.push_back(std::uniform_int_distribution<int>(static_cast<int>(spec.tail_lo),
                                                              static_cast<int>(spec.tail_hi))(rng));
      }
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<lang::InputRecord> generate_inputs(const Benchmark &b, std::size_t count, std::uint64_t seed) {
  return generate_inputs(b.inputs, count, seed);
}

void write_inputs(const std::vector<lang::InputRecord> &inputs, const std::string &dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw UserError("cannot create " + dir + ": " + ec.message());
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    std::ostringstream name;
    name << "input-" << std::setw(4) << std::setfill('0') << i << ".txt";
    const fs::path p = fs::path(dir) / name.str();
    std::ofstream out(p);
    if (!out || !(out << lang::format_input(inputs[i]))) throw UserError("cannot write " + p.string());
  }
}

} // namespace mantis::bench
