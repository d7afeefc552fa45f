// Experiment runner for the distributed mean estimation library: simulates
// the quantization protocol on generated inputs, sweeps parameter grids,
// runs the correlated-Gaussian rate-distortion experiment, and quantizes
// single vectors for debugging.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "dme/gaussian_wz.hpp"
#include "dme/protocol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kSpecVersion = 1;
constexpr int kExitCheckFailed = 2;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string delta_summary(const std::vector<double>& deltas) {
  bool uniform = true;
  for (const double d : deltas) uniform = uniform && d == deltas.front();
  if (uniform) return fmt(deltas.front());
  double lo = deltas.front(), hi = deltas.front(), sum = 0.0;
  for (const double d : deltas) {
    lo = std::min(lo, d);
    hi = std::max(hi, d);
    sum += d;
  }
  return "min=" + fmt(lo) + ";max=" + fmt(hi) +
         ";mean=" + fmt(sum / double(deltas.size()));
}

std::string to_hex(const std::vector<std::uint8_t>& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  out.reserve(bytes.size() * 2);
  for (const std::uint8_t b : bytes) {
    out.push_back(digits[b >> 4]);
    out.push_back(digits[b & 0xf]);
  }
  return out;
}

void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string());
  out << content;
  if (!out.good()) throw std::runtime_error("failed writing " + path.string());
}

std::vector<double> read_vector_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<double> values;
  double v;
  while (in >> v) values.push_back(v);
  if (values.empty()) throw std::runtime_error("empty vector file " + path.string());
  return values;
}

// Flat TOML subset: `key = value` lines, # comments, quoted strings, and
// [a, b, c] arrays. Values apply to the matching long option of the active
// subcommand unless that option was given on the command line.
void apply_config_file(const fs::path& path, CLI::App* cmd) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config " + path.string());
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t\r");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) {
      throw std::runtime_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
    }
    const std::string key = trim(stripped.substr(0, eq));
    std::string value = trim(stripped.substr(eq + 1));

    std::vector<std::string> values;
    if (!value.empty() && value.front() == '[') {
      if (value.back() != ']') {
        throw std::runtime_error("config line " + std::to_string(lineno) +
                                 ": unterminated array");
      }
      std::istringstream items(value.substr(1, value.size() - 2));
      std::string item;
      while (std::getline(items, item, ',')) values.push_back(trim(item));
    } else {
      values.push_back(value);
    }
    for (auto& v : values) {
      if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        v = v.substr(1, v.size() - 2);
      }
    }

    CLI::Option* opt = cmd->get_option_no_throw("--" + key);
    if (opt == nullptr) {
      throw std::runtime_error("config key '" + key + "' is not an option of " +
                               cmd->get_name());
    }
    if (opt->count() > 0) continue;  // command-line flags win
    for (const auto& v : values) opt->add_result(v);
    opt->run_callback();
  }
}

dme::Scheme parse_scheme(const std::string& name) {
  const auto scheme = dme::scheme_from_string(name);
  if (!scheme) throw CLI::ValidationError("--scheme", "unknown scheme " + name);
  return *scheme;
}

dme::PairKind parse_dist(const std::string& name) {
  const auto kind = dme::pair_kind_from_string(name);
  if (!kind) throw CLI::ValidationError("--dist", "unknown generator " + name);
  return *kind;
}

struct RunOutcome {
  dme::ProtocolResult result;
  double mse_stderr = 0.0;
  bool check_passed = true;
};

RunOutcome run_one(dme::Scheme scheme, std::size_t n, std::size_t d,
                   std::size_t r, double delta, std::size_t trials,
                   std::uint64_t seed, dme::PairKind dist) {
  const std::vector<double> deltas(n, delta);
  std::vector<dme::Vector> xs, ys;
  dme::make_client_vectors(dist, n, d, deltas,
                           dme::scheme_needs_unit_ball(scheme), seed, xs, ys);
  dme::ProtocolConfig config{n, d, r, scheme, deltas, seed, trials};
  RunOutcome outcome;
  outcome.result = dme::run_protocol(xs, ys, config);

  double sum_sq = 0.0;
  for (const double e : outcome.result.per_trial_sq_error) {
    sum_sq += (e - outcome.result.mse) * (e - outcome.result.mse);
  }
  outcome.mse_stderr = std::sqrt(sum_sq / double(trials) / double(trials));
  if (outcome.result.theory_bound) {
    outcome.check_passed = outcome.result.mse <=
                           *outcome.result.theory_bound + 3.0 * outcome.mse_stderr;
  }
  return outcome;
}

int cmd_simulate(const std::string& scheme_name, std::size_t n, std::size_t d,
                 std::size_t r, double delta, const std::string& delta_file,
                 std::size_t trials, std::uint64_t seed,
                 const std::string& dist_name, const fs::path& out_dir,
                 bool check, const std::string& format) {
  const dme::Scheme scheme = parse_scheme(scheme_name);
  const dme::PairKind dist = parse_dist(dist_name);

  std::vector<double> deltas(n, delta);
  if (!delta_file.empty()) {
    deltas = read_vector_file(delta_file);
    if (deltas.size() != n) {
      throw std::runtime_error("--delta-file must hold exactly n values");
    }
  }

  std::vector<dme::Vector> xs, ys;
  dme::make_client_vectors(dist, n, d, deltas,
                           dme::scheme_needs_unit_ball(scheme), seed, xs, ys);
  dme::ProtocolConfig config{n, d, r, scheme, deltas, seed, trials};
  const dme::ProtocolResult result = dme::run_protocol(xs, ys, config);

  double sum_sq = 0.0;
  for (const double e : result.per_trial_sq_error) {
    sum_sq += (e - result.mse) * (e - result.mse);
  }
  const double mse_stderr = std::sqrt(sum_sq / double(trials) / double(trials));

  std::size_t bits_max = 0;
  for (const std::size_t b : result.client_bits) bits_max = std::max(bits_max, b);

  const std::string summary = delta_summary(deltas);
  std::ostringstream csv;
  csv << "trial,scheme,n,d,r,delta_summary,sq_error,bits_max\n";
  for (std::size_t t = 0; t < result.per_trial_sq_error.size(); ++t) {
    csv << t << ',' << scheme_name << ',' << n << ',' << d << ',' << r << ','
        << summary << ',' << fmt(result.per_trial_sq_error[t]) << ','
        << bits_max << '\n';
  }

  json summary_json{
      {"spec_version", kSpecVersion},
      {"scheme", scheme_name},
      {"n", n},
      {"d", d},
      {"r", r},
      {"trials", trials},
      {"seed", seed},
      {"delta_summary", summary},
      {"mse", result.mse},
      {"mse_stderr", mse_stderr},
      {"bits_max", bits_max},
      {"bits_allowed", result.bits_allowed},
      {"theory_bound", result.theory_bound ? json(*result.theory_bound) : json()},
      {"check_enabled", check},
  };

  bool check_passed = true;
  if (result.theory_bound) {
    check_passed = result.mse <= *result.theory_bound + 3.0 * mse_stderr;
    summary_json["bound_ratio"] = result.mse / *result.theory_bound;
  }
  summary_json["check_passed"] = check_passed;

  write_file(out_dir / "results.csv", csv.str());
  write_file(out_dir / "summary.json", summary_json.dump(2) + "\n");
  if (format == "json") {
    std::cout << summary_json.dump(2) << '\n';
  } else {
    std::cout << "scheme=" << scheme_name << " mse=" << fmt(result.mse)
              << (result.theory_bound
                      ? " bound=" + fmt(*result.theory_bound)
                      : std::string())
              << " bits_max=" << bits_max << '\n';
  }
  if (check && !check_passed) {
    std::cerr << "check failed: mse " << fmt(result.mse) << " above bound "
              << fmt(*result.theory_bound) << " + slack\n";
    return kExitCheckFailed;
  }
  return 0;
}

int cmd_sweep(const std::string& scheme_name, std::vector<std::size_t> ns,
              std::vector<std::size_t> ds, std::vector<std::size_t> rs,
              std::vector<double> deltas, std::size_t trials,
              std::uint64_t seed, const std::string& dist_name,
              const fs::path& out_dir, bool check, std::size_t jobs) {
  const dme::Scheme scheme = parse_scheme(scheme_name);
  const dme::PairKind dist = parse_dist(dist_name);
  if (ns.empty() || ds.empty() || rs.empty() || deltas.empty()) {
    throw std::runtime_error("sweep: empty grid");
  }

  struct GridPoint {
    std::size_t n, d, r;
    double delta;
  };
  std::vector<GridPoint> grid;
  for (const auto n : ns)
    for (const auto d : ds)
      for (const auto r : rs)
        for (const auto delta : deltas) grid.push_back({n, d, r, delta});

  // Grid points run in a bounded worker pool; rows are emitted in grid
  // order regardless of completion order.
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  std::vector<std::future<RunOutcome>> futures(grid.size());
  std::size_t next = 0;
  std::vector<RunOutcome> outcomes(grid.size());
  while (next < grid.size()) {
    const std::size_t batch = std::min(jobs, grid.size() - next);
    for (std::size_t i = 0; i < batch; ++i) {
      const GridPoint& g = grid[next + i];
      futures[next + i] = std::async(std::launch::async, [=] {
        return run_one(scheme, g.n, g.d, g.r, g.delta, trials, seed, dist);
      });
    }
    for (std::size_t i = 0; i < batch; ++i) {
      outcomes[next + i] = futures[next + i].get();
    }
    next += batch;
  }

  std::ostringstream csv;
  csv << "scheme,n,d,r,delta,trials,seed,mse,theory_bound,ratio,bits_max\n";
  bool all_passed = true;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const GridPoint& g = grid[i];
    const RunOutcome& o = outcomes[i];
    std::size_t bits_max = 0;
    for (const std::size_t b : o.result.client_bits) {
      bits_max = std::max(bits_max, b);
    }
    csv << scheme_name << ',' << g.n << ',' << g.d << ',' << g.r << ','
        << fmt(g.delta) << ',' << trials << ',' << seed << ','
        << fmt(o.result.mse) << ',';
    if (o.result.theory_bound) {
      csv << fmt(*o.result.theory_bound) << ','
          << fmt(o.result.mse / *o.result.theory_bound);
    } else {
      csv << ',';
    }
    csv << ',' << bits_max << '\n';
    all_passed = all_passed && o.check_passed;
  }
  write_file(out_dir / "sweep.csv", csv.str());
  std::cout << "wrote " << grid.size() << " grid points to "
            << (out_dir / "sweep.csv").string() << '\n';
  if (check && !all_passed) {
    std::cerr << "check failed: at least one grid point above its bound\n";
    return kExitCheckFailed;
  }
  return 0;
}

int cmd_gaussian_wz(double sigma_y, double sigma_z,
                    std::vector<double> distortions, std::size_t d,
                    std::size_t trials, std::uint64_t seed,
                    const std::string& source_name, const fs::path& out_dir,
                    bool check) {
  if (distortions.empty()) throw std::runtime_error("gaussian-wz: no distortion targets");
  dme::NoiseSource source;
  if (source_name == "gaussian") {
    source = dme::NoiseSource::gaussian;
  } else if (source_name == "bounded") {
    source = dme::NoiseSource::bounded;
  } else {
    throw CLI::ValidationError("--source", "unknown source " + source_name);
  }

  std::ostringstream csv;
  csv << "sigma_z,D,d,rate_per_dim,shannon_rate,excess_rate,empirical_distortion\n";
  bool all_passed = true;
  for (const double target : distortions) {
    dme::GwzConfig config;
    config.d = d;
    config.sigma_y = sigma_y;
    config.sigma_z = sigma_z;
    config.distortion_target = target;
    config.trials = trials;
    config.seed = seed;
    config.source = source;
    const dme::GwzResult result = dme::gwz_run(config);
    csv << fmt(sigma_z) << ',' << fmt(target) << ',' << d << ','
        << fmt(result.rate_per_dim) << ',' << fmt(result.shannon_rate) << ','
        << fmt(result.excess_rate) << ','
        << fmt(result.empirical_distortion_per_dim) << '\n';
    all_passed = all_passed &&
                 result.empirical_distortion_per_dim <=
                     target + 3.0 * result.distortion_stderr;
  }
  write_file(out_dir / "gaussian_wz.csv", csv.str());
  std::cout << "wrote " << distortions.size() << " rows to "
            << (out_dir / "gaussian_wz.csv").string() << '\n';
  if (check && !all_passed) {
    std::cerr << "check failed: empirical distortion above target + slack\n";
    return kExitCheckFailed;
  }
  return 0;
}

int cmd_quantize(const std::string& scheme_name, const std::string& input_path,
                 const std::string& side_path, std::size_t n, std::size_t r,
                 double delta, std::uint64_t seed, const std::string& format) {
  const dme::Scheme scheme = parse_scheme(scheme_name);
  const dme::Vector x_raw = read_vector_file(input_path);
  const dme::Vector y_raw = read_vector_file(side_path);
  if (x_raw.size() != y_raw.size()) {
    throw std::runtime_error("input and side-info dimensions differ");
  }
  const dme::Vector x = dme::pad_to_power_of_two(x_raw);
  const dme::Vector y = dme::pad_to_power_of_two(y_raw);

  double dist = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    dist += (x[i] - y[i]) * (x[i] - y[i]);
  }
  dist = std::sqrt(dist);
  if (delta <= 0.0) delta = dist;  // default: the measured distance

  const dme::ClientCodec codec(scheme, n, x.size(), r, delta);
  dme::RandomStream enc_root(seed, 0, "quantize");
  dme::RandomStream dec_root(seed, 0, "quantize");
  const std::vector<std::uint8_t> message = codec.encode(x, enc_root);
  const dme::Vector decoded = codec.decode(message, y, dec_root);

  double err = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    err += (decoded[i] - x[i]) * (decoded[i] - x[i]);
  }
  err = std::sqrt(err);

  if (format == "json") {
    json out{{"scheme", scheme_name},
             {"d", x_raw.size()},
             {"padded_d", x.size()},
             {"message_hex", to_hex(message)},
             {"message_bits", codec.message_bits()},
             {"decoded", decoded},
             {"l2_error", err}};
    std::cout << out.dump(2) << '\n';
  } else {
    std::cout << "message_hex=" << to_hex(message) << '\n'
              << "message_bits=" << codec.message_bits() << '\n';
    std::cout << "decoded=";
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      std::cout << (i ? " " : "") << fmt(decoded[i]);
    }
    std::cout << '\n' << "l2_error=" << fmt(err) << '\n';
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed mean estimation with decoder side information"};
  app.require_subcommand(1);

  std::string scheme = "known_low";
  std::size_t n = 4, d = 64, r = 32, trials = 100, jobs = 0;
  std::uint64_t seed = 0;
  double delta = 1.0;
  std::string delta_file;
  std::string dist = "gaussian-normalized";
  std::string out_dir = "dme_out";
  std::string format = "csv";
  bool check = false;
  bool print_config = false;

  std::string config_path;
  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_option("--out", out_dir, "Output directory")->capture_default_str();
    cmd->add_flag("--print-config", print_config,
                  "Print the effective configuration and exit");
    cmd->add_option("--config", config_path,
                    "Read options from a key = value (TOML) file; "
                    "command-line flags override");
  };

  auto* simulate = app.add_subcommand("simulate", "Run one protocol configuration");
  simulate->add_option("--scheme", scheme, "Quantization scheme")->capture_default_str();
  simulate->add_option("--n", n, "Clients")->capture_default_str();
  simulate->add_option("--d", d, "Dimension")->capture_default_str();
  simulate->add_option("--r", r, "Bits per client")->capture_default_str();
  simulate->add_option("--delta", delta, "Distance budget per client")
      ->capture_default_str();
  simulate->add_option("--delta-file", delta_file,
                       "File with one delta per client (overrides --delta)");
  simulate->add_option("--trials", trials, "Trial count")->capture_default_str();
  simulate->add_option("--dist", dist,
                       "Input generator: sphere-surface, gaussian-normalized, "
                       "adversarial-axis")
      ->capture_default_str();
  simulate->add_option("--format", format, "Stdout format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  simulate->add_flag("--check", check, "Exit nonzero if MSE exceeds the bound");
  add_common(simulate);

  std::vector<std::size_t> grid_n{4}, grid_d{64}, grid_r{32};
  std::vector<double> grid_delta{1.0};
  auto* sweep = app.add_subcommand("sweep", "Run a parameter grid");
  sweep->add_option("--scheme", scheme, "Quantization scheme")->capture_default_str();
  sweep->add_option("--n", grid_n, "Client counts")->delimiter(',')->capture_default_str();
  sweep->add_option("--d", grid_d, "Dimensions")->delimiter(',')->capture_default_str();
  sweep->add_option("--r", grid_r, "Budgets")->delimiter(',')->capture_default_str();
  sweep->add_option("--delta", grid_delta, "Distance budgets")
      ->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--trials", trials, "Trials per grid point")->capture_default_str();
  sweep->add_option("--dist", dist, "Input generator")->capture_default_str();
  sweep->add_option("--jobs", jobs, "Worker pool size (0 = hardware)")
      ->capture_default_str();
  sweep->add_flag("--check", check, "Exit nonzero if any point exceeds its bound");
  add_common(sweep);

  double sigma_y = 1.0, sigma_z = 1.0;
  std::vector<double> distortions{1.0 / 308.0};
  std::string source = "gaussian";
  auto* gwz = app.add_subcommand("gaussian-wz",
                                 "Correlated-source rate-distortion experiment");
  gwz->add_option("--sigma-y", sigma_y, "Side information stddev")->capture_default_str();
  gwz->add_option("--sigma-z", sigma_z, "Noise stddev")->capture_default_str();
  gwz->add_option("--distortion", distortions, "Per-coordinate targets D")
      ->delimiter(',')
      ->capture_default_str();
  gwz->add_option("--d", d, "Dimension")->capture_default_str();
  gwz->add_option("--trials", trials, "Trial count")->capture_default_str();
  gwz->add_option("--source", source, "Noise source: gaussian or bounded")
      ->check(CLI::IsMember({"gaussian", "bounded"}))
      ->capture_default_str();
  gwz->add_flag("--check", check, "Exit nonzero if distortion exceeds target");
  add_common(gwz);

  std::string input_path, side_path;
  auto* quantize =
      app.add_subcommand("quantize", "Quantize one vector end to end");
  quantize->add_option("--scheme", scheme, "Quantization scheme")->capture_default_str();
  quantize->add_option("--input", input_path, "Input vector file, one real per line")
      ->required();
  quantize->add_option("--side-info", side_path, "Side information file")->required();
  quantize->add_option("--n", n, "Protocol size the parameters assume")
      ->capture_default_str();
  quantize->add_option("--r", r, "Bits per client")->capture_default_str();
  quantize->add_option("--delta", delta,
                       "Distance budget (<= 0 means use the measured distance)")
      ->capture_default_str();
  quantize->add_option("--format", format, "Stdout format: csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->capture_default_str();
  add_common(quantize);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = app.get_subcommands().front();
    if (!config_path.empty()) apply_config_file(config_path, active);
    if (print_config) {
      std::cout << active->config_to_str(true, true);
      return 0;
    }
    if (active == simulate) {
      return cmd_simulate(scheme, n, d, r, delta, delta_file, trials, seed,
                          dist, out_dir, check, format);
    }
    if (active == sweep) {
      return cmd_sweep(scheme, grid_n, grid_d, grid_r, grid_delta, trials,
                       seed, dist, out_dir, check, jobs);
    }
    if (active == gwz) {
      return cmd_gaussian_wz(sigma_y, sigma_z, distortions, d, trials, seed,
                             source, out_dir, check);
    }
    if (active == quantize) {
      return cmd_quantize(scheme, input_path, side_path, n, r, delta, seed,
                          format);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
