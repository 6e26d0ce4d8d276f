#include "mantis/profile/profile.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "mantis/error.hpp"

namespace mantis::profile {

using json = nlohmann::json;
using lang::InputRecord;
using lang::Program;
using lang::RunResult;

int Dataset::column(const std::string &id) const {
  auto it = std::find(feature_ids.begin(), feature_ids.end(), id);
  return it == feature_ids.end() ? -1 : static_cast<int>(it - feature_ids.begin());
}

Dataset Dataset::rows(const std::vector<std::size_t> &which) const {
  Dataset out;
  out.feature_ids = feature_ids;
  for (std::size_t r : which) {
    out.y.push_back(y.at(r));
    out.x.push_back(x.at(r));
    if (r < provenance.size()) out.provenance.push_back(provenance[r]);
  }
  return out;
}

Dataset Dataset::without_columns(const std::vector<std::string> &ids) const {
  const std::set<std::string> drop(ids.begin(), ids.end());
  std::vector<std::size_t> keep;
  Dataset out;
  for (std::size_t j = 0; j < feature_ids.size(); ++j)
    if (!drop.count(feature_ids[j])) {
      keep.push_back(j);
      out.feature_ids.push_back(feature_ids[j]);
    }
  out.y = y;
  out.provenance = provenance;
  out.failed = failed;
  out.x.reserve(x.size());
  for (const auto &row : x) {
    std::vector<double> r;
    r.reserve(keep.size());
    for (std::size_t j : keep)
      r.push_back(row[j]);
    out.x.push_back(std::move(r));
  }
  return out;
}

double noise_factor(double sigma, std::uint64_t seed, std::size_t row) {
  if (sigma <= 0) return 1.0;
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32)};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> noise(0.0, sigma);
  return 1.0 + noise(rng);
}

namespace {

struct Outcome {
  std::optional<RunResult> run;
  std::string error;
};

std::vector<Outcome> run_all(const Program &p, const std::vector<InputRecord> &inputs, int parallelism) {
  std::vector<Outcome> out(inputs.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < inputs.size(); i = next++) {
      try {
        out[i].run = lang::interpret(p, inputs[i]);
      } catch (const lang::RuntimeError &e) {
        out[i].error = e.what();
      }
    }
  };
  const int threads = std::clamp(parallelism, 1, static_cast<int>(std::max<std::size_t>(inputs.size(), 1)));
  if (threads == 1) {
    worker();
    return out;
  }
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back(worker);
  for (auto &t : pool)
    t.join();
  return out;
}

std::string format_number(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
  (void)ec;
  return std::string(buf, p);
}

double parse_number(std::string_view s, std::size_t line) {
  double v = 0;
  const char *first = s.data();
  const char *last = s.data() + s.size();
  if (first != last && *first == '+') ++first;
  auto [p, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || p != last)
    throw UserError("malformed number '" + std::string(s) + "' on CSV line " + std::to_string(line));
  return v;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    std::size_t comma = line.find(',', start);
    out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos
                                                                     : comma - start));
    if (comma == std::string_view::npos) return out;
    start = comma + 1;
  }
}

std::string slurp(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UserError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

Dataset profile_batch(const Program &instrumented, const instrument::FeatureSchema &schema,
                      const std::vector<InputRecord> &inputs, const ProfileConfig &config,
                      const std::vector<std::string> &input_names) {
  if (inputs.empty()) throw UserError("profiling needs at least one input");
  if (config.noise_sigma < 0) throw UserError("noise sigma must be nonnegative");
  if (!input_names.empty() && input_names.size() != inputs.size())
    throw UserError("input names do not match inputs");

  const auto outcomes = run_all(instrumented, inputs, config.parallelism);
  Dataset d;
  d.feature_ids = schema.ids();
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    const std::string name = input_names.empty() ? "input" + std::to_string(i) : input_names[i];
    const Outcome &o = outcomes[i];
    if (!o.run) {
      d.failed.push_back({name, o.error});
      continue;
    }
    d.y.push_back(static_cast<double>(o.run->cost) * noise_factor(config.noise_sigma, config.seed, i));
    d.x.push_back(instrument::feature_vector(schema, *o.run));
    d.provenance.push_back({name, o.run->trapped, o.run->cost});
  }
  if (d.y.empty()) {
    std::string msg = "every profiling run failed";
    if (!d.failed.empty()) msg += " (first: " + d.failed.front().input + ": " + d.failed.front().error + ")";
    throw UserError(msg);
  }
  return d;
}

std::string to_csv(const Dataset &d) {
  std::string out = "cost";
  for (const auto &id : d.feature_ids)
    out += ",f_" + id;
  out += '\n';
  for (std::size_t i = 0; i < d.n(); ++i) {
    out += format_number(d.y[i]);
    for (double v : d.x[i])
      out += "," + format_number(v);
    out += '\n';
  }
  return out;
}

Dataset dataset_from_csv(const std::string &text) {
  Dataset d;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw UserError("empty dataset CSV");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  auto header = split(line);
  if (header.empty() || header[0] != "cost") throw UserError("dataset CSV must start with a cost column");
  for (std::size_t j = 1; j < header.size(); ++j) {
    if (header[j].substr(0, 2) != "f_") throw UserError("feature column names must start with f_");
    d.feature_ids.emplace_back(header[j].substr(2));
  }
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != header.size())
      throw UserError("CSV line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                      " cells, expected " + std::to_string(header.size()));
    d.y.push_back(parse_number(cells[0], lineno));
    std::vector<double> row;
    row.reserve(cells.size() - 1);
    for (std::size_t j = 1; j < cells.size(); ++j)
      row.push_back(parse_number(cells[j], lineno));
    d.x.push_back(std::move(row));
  }
  return d;
}

std::string provenance_json(const Dataset &d, const ProfileConfig &config) {
  json j;
  j["noiseSigma"] = config.noise_sigma;
  j["seed"] = config.seed;
  j["rows"] = json::array();
  for (const auto &p : d.provenance)
    j["rows"].push_back({{"input", p.input}, {"trapped", p.trapped}, {"cost", p.cost}});
  j["failed"] = json::array();
  for (const auto &f : d.failed)
    j["failed"].push_back({{"input", f.input}, {"error", f.error}});
  return j.dump(2) + "\n";
}

void write_dataset(const Dataset &d, const ProfileConfig &config, const std::string &csv_path) {
  namespace fs = std::filesystem;
  const fs::path path(csv_path);
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream csv(path, std::ios::binary);
  csv << to_csv(d);
  fs::path prov = path;
  prov.replace_extension(".provenance.json");
  std::ofstream pj(prov, std::ios::binary);
  pj << provenance_json(d, config);
  if (!csv || !pj) throw UserError("cannot write dataset to " + csv_path);
}

Dataset read_dataset(const std::string &csv_path) { return dataset_from_csv(slurp(csv_path)); }

Corpus read_corpus(const std::string &dir) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(dir)) throw UserError("input directory not found: " + dir);
  std::vector<fs::path> files;
  for (const auto &e : fs::directory_iterator(dir))
    if (e.is_regular_file()) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  Corpus c;
  for (const auto &f : files) {
    c.names.push_back(f.filename().string());
    c.inputs.push_back(lang::parse_input(slurp(f.string())));
  }
  if (c.inputs.empty()) throw UserError("input directory is empty: " + dir);
  return c;
}

} // namespace mantis::profile
