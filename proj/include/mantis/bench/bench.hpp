#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mantis/lang/interpreter.hpp"

namespace mantis::bench {

// Shape of the inputs a benchmark expects: fixed integer positions, then a
// tail of random length.
struct InputSpec {
  std::vector<std::pair<int, int>> prefix; // inclusive ranges
  int tail_min = 0;
  int tail_max = 0;
  double tail_lo = 0;
  double tail_hi = 0;
  bool tail_float = false;
};

struct Benchmark {
  std::string name;
  std::string source;
  InputSpec inputs;
};

// The bundled programs (bench/programs), sorted by name.
const std::vector<Benchmark> &benchmarks();
// Throws UserError for unknown names.
const Benchmark &find_benchmark(const std::string &name);

std::vector<lang::InputRecord> generate_inputs(const InputSpec &spec, std::size_t count, std::uint64_t seed);
std::vector<lang::InputRecord> generate_inputs(const Benchmark &b, std::size_t count, std::uint64_t seed);

// Writes inputs as `<dir>/input-NNNN.txt`.
void write_inputs(const std::vector<lang::InputRecord> &inputs, const std::string &dir);

} // namespace mantis::bench
