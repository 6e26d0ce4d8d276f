#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mantis/instrument/instrument.hpp"
#include "mantis/lang/interpreter.hpp"

namespace mantis::profile {

struct RowProvenance {
  std::string input;
  bool trapped = false;
  std::uint64_t cost = 0; // noise-free interpreter cost
};

struct FailedRun {
  std::string input;
  std::string error;
};

// n samples of (cost, features). Rows of `x` follow `feature_ids`.
struct Dataset {
  std::vector<std::string> feature_ids;
  std::vector<double> y;
  std::vector<std::vector<double>> x;
  std::vector<RowProvenance> provenance;
  std::vector<FailedRun> failed;

  std::size_t n() const { return y.size(); }
  std::size_t m() const { return feature_ids.size(); }
  int column(const std::string &id) const;

  // Copy restricted to the given rows, in the given order.
  Dataset rows(const std::vector<std::size_t> &which) const;
  // Copy without the named columns.
  Dataset without_columns(const std::vector<std::string> &ids) const;
};

struct ProfileConfig {
  double noise_sigma = 0.0;
  std::uint64_t seed = 42;
  int parallelism = 1;
};

// Runs `instrumented` once per input. Row i gets y = cost * (1 + e_i) with
// e_i ~ N(0, sigma^2) drawn from a generator seeded by (seed, i), so the
// dataset does not depend on parallelism or on which other rows failed.
// Runs ending in a runtime error are left out and listed in `failed`.
Dataset profile_batch(const lang::Program &instrumented, const instrument::FeatureSchema &schema,
                      const std::vector<lang::InputRecord> &inputs, const ProfileConfig &config = {},
                      const std::vector<std::string> &input_names = {});

// Multiplicative noise factor (1 + e) applied to row `row`.
double noise_factor(double sigma, std::uint64_t seed, std::size_t row);

std::string to_csv(const Dataset &d);
Dataset dataset_from_csv(const std::string &text);
std::string provenance_json(const Dataset &d, const ProfileConfig &config);

void write_dataset(const Dataset &d, const ProfileConfig &config, const std::string &csv_path);
Dataset read_dataset(const std::string &csv_path);

// Input corpus: every regular file in `dir`, sorted by name.
struct Corpus {
  std::vector<std::string> names;
  std::vector<lang::InputRecord> inputs;
};

Corpus read_corpus(const std::string &dir);

} // namespace mantis::profile
