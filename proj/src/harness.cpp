#include "eigennet/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace eigennet::harness {

std::string_view to_string(Experiment e) {
  switch (e) {
    case Experiment::ac_compare: return "ac-compare";
    case Experiment::eig_converge: return "eig-converge";
    case Experiment::multi_eig: return "multi-eig";
    case Experiment::roc: return "roc";
    case Experiment::audit_messages: return "audit-messages";
    case Experiment::prop_check: return "prop-check";
  }
  return "unknown";
}

std::string_view to_string(Algorithm a) { return a == Algorithm::dpm ? "dpm" : "dla"; }

std::string_view to_string(Pipeline p) {
  switch (p) {
    case Pipeline::exact: return "exact";
    case Pipeline::dpm: return "dpm";
    case Pipeline::dla: return "dla";
  }
  return "unknown";
}

Experiment experiment_from_string(std::string_view name) {
  for (auto e : {Experiment::ac_compare, Experiment::eig_converge, Experiment::multi_eig,
                 Experiment::roc, Experiment::audit_messages, Experiment::prop_check}) {
    if (to_string(e) == name) return e;
  }
  throw InvalidArgument("unknown experiment: " + std::string(name));
}

namespace {

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += sep;
    out += parts[i];
  }
  return out;
}

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto piece = trim(s.substr(start, comma == std::string_view::npos ? s.size() - start : comma - start));
    if (!piece.empty()) out.emplace_back(piece);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  s = trim(s);
  if (s.empty()) return false;
  if constexpr (std::is_floating_point_v<T>) {
    // from_chars rejects a leading '+'.
    if (s.front() == '+') s.remove_prefix(1);
  }
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool parse_bool(std::string_view s, bool& out) {
  s = trim(s);
  if (s == "true" || s == "1" || s == "yes" || s == "on") {
    out = true;
    return true;
  }
  if (s == "false" || s == "0" || s == "no" || s == "off") {
    out = false;
    return true;
  }
  return false;
}

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "experiment", "K", "N", "M", "I", "P", "sigma2", "snr_db", "source_var", "engines",
      "link_failure_prob", "trials", "seed", "topology_radius", "topology_seed", "topology_file",
      "detectors", "pipelines", "alphas", "roc_M", "h0_trials", "h1_trials", "eig_indices",
      "algorithms", "exact_trace", "statistic_consensus", "spurious_rel_tol", "roc_grid_points",
      "convergence_K", "convergence_M", "output"};
  return keys;
}

bool needs_signal(Experiment e) {
  return e == Experiment::ac_compare || e == Experiment::eig_converge || e == Experiment::multi_eig ||
         e == Experiment::roc;
}

void apply_defaults(ExperimentConfig& c, const std::map<std::string, std::string>& given) {
  using consensus::Engine;
  if (!given.contains("I")) {
    switch (c.experiment) {
      case Experiment::ac_compare: c.ac_iterations = {5, 10, 15, 20, 25, 30}; break;
      case Experiment::eig_converge: c.ac_iterations = {10, 15}; break;
      case Experiment::multi_eig: c.ac_iterations = {20, 30}; break;
      default: c.ac_iterations = {30}; break;
    }
  }
  if (!given.contains("engines")) {
    switch (c.experiment) {
      case Experiment::ac_compare: c.engines = {Engine::ideal, Engine::standard, Engine::chebyshev}; break;
      case Experiment::eig_converge:
      case Experiment::multi_eig: c.engines = {Engine::ideal, Engine::chebyshev}; break;
      default: c.engines = {Engine::chebyshev}; break;
    }
  }
  if (!given.contains("P")) c.p = static_cast<int>(c.snr_db.size());
  if (c.roc_m.empty()) c.roc_m = {c.m};
  if (c.h0_trials == 0) c.h0_trials = c.trials;
  if (c.h1_trials == 0) c.h1_trials = c.trials;
}

}  // namespace

ConfigError::ConfigError(std::vector<std::string> issues)
    : InvalidArgument("invalid configuration:\n  " + join(issues, "\n  ")), issues_(std::move(issues)) {}

void ExperimentConfig::validate() const {
  std::vector<std::string> issues;
  auto need = [&](bool ok, const std::string& msg) {
    if (!ok) issues.push_back(msg);
  };
  need(k >= 2, "K: must be >= 2");
  need(n >= 1, "N: must be >= 1");
  need(m >= 1, "M: must be >= 1");
  need(!ac_iterations.empty(), "I: at least one value required");
  for (int i : ac_iterations) need(i >= 0, "I: values must be >= 0");
  need(sigma2 > 0.0 && std::isfinite(sigma2), "sigma2: must be > 0");
  need(p >= 0, "P: must be >= 0");
  need(static_cast<int>(snr_db.size()) == p, "snr_db: expected P = " + std::to_string(p) + " values");
  need(source_var.empty() || static_cast<int>(source_var.size()) == p, "source_var: expected P values");
  for (double v : source_var) need(v > 0.0, "source_var: values must be > 0");
  need(!engines.empty(), "engines: at least one engine required");
  need(link_failure_prob >= 0.0 && link_failure_prob < 1.0, "link_failure_prob: must lie in [0, 1)");
  need(trials >= 1, "trials: must be >= 1");
  need(topology_radius > 0.0, "topology_radius: must be > 0");
  for (double a : alphas) need(a > 0.0 && a < 1.0, "alphas: values must lie in (0, 1)");
  for (int mm : roc_m) need(mm >= 1, "roc_M: values must be >= 1");
  need(h0_trials >= 0 && h1_trials >= 0, "h0_trials/h1_trials: must be >= 0");
  for (int i : eig_indices) need(i >= 1 && i <= k, "eig_indices: values must lie in [1, K]");
  need(spurious_rel_tol >= 0.0, "spurious_rel_tol: must be >= 0");
  need(roc_grid_points == 0 || roc_grid_points >= 2, "roc_grid_points: must be 0 or >= 2");
  need(convergence_k >= 2, "convergence_K: must be >= 2");
  need(convergence_m >= 2, "convergence_M: must be >= 2");
  if (experiment == Experiment::roc) need(p >= 1, "snr_db: roc needs at least one source");
  const bool uses_dla = experiment == Experiment::multi_eig ||
                        ((experiment == Experiment::eig_converge || experiment == Experiment::audit_messages) &&
                         std::find(algorithms.begin(), algorithms.end(), Algorithm::dla) != algorithms.end()) ||
                        (experiment == Experiment::roc &&
                         std::find(pipelines.begin(), pipelines.end(), Pipeline::dla) != pipelines.end());
  if (uses_dla) {
    need(m <= k, "M: DLA requires M <= K");
    if (experiment == Experiment::roc) {
      for (int mm : roc_m) need(mm <= k, "roc_M: DLA requires M <= K");
    }
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));
}

ExperimentConfig validate_config(std::string_view text, std::optional<Experiment> experiment) {
  std::map<std::string, std::string> given;
  std::vector<std::string> issues;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos) {
      issues.push_back("line " + std::to_string(line_no) + ": expected 'key = value'");
      continue;
    }
    const std::string key(trim(view.substr(0, eq)));
    const std::string value(trim(view.substr(eq + 1)));
    if (!known_keys().contains(key)) {
      issues.push_back("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
      continue;
    }
    if (given.contains(key)) {
      issues.push_back("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      continue;
    }
    given[key] = value;
  }

  ExperimentConfig c;
  std::vector<std::string> missing;
  if (given.contains("experiment")) {
    try {
      c.experiment = experiment_from_string(given["experiment"]);
      if (experiment && *experiment != c.experiment) {
        issues.push_back("experiment: file says '" + given["experiment"] + "' but '" +
                         std::string(to_string(*experiment)) + "' was requested");
      }
    } catch (const InvalidArgument&) {
      issues.push_back("experiment: unknown experiment '" + given["experiment"] + "'");
    }
  } else if (experiment) {
    c.experiment = *experiment;
  } else {
    missing.emplace_back("experiment");
  }
  if (needs_signal(c.experiment) && !given.contains("snr_db")) missing.emplace_back("snr_db");

  auto get_int = [&](const char* key, int& out) {
    if (auto it = given.find(key); it != given.end() && !parse_number(it->second, out)) {
      issues.push_back(std::string(key) + ": expected an integer, got '" + it->second + "'");
    }
  };
  auto get_u64 = [&](const char* key, std::uint64_t& out) {
    if (auto it = given.find(key); it != given.end() && !parse_number(it->second, out)) {
      issues.push_back(std::string(key) + ": expected an unsigned integer, got '" + it->second + "'");
    }
  };
  auto get_double = [&](const char* key, double& out) {
    if (auto it = given.find(key); it != given.end() && !parse_number(it->second, out)) {
      issues.push_back(std::string(key) + ": expected a number, got '" + it->second + "'");
    }
  };
  auto get_bool = [&](const char* key, bool& out) {
    if (auto it = given.find(key); it != given.end() && !parse_bool(it->second, out)) {
      issues.push_back(std::string(key) + ": expected true or false, got '" + it->second + "'");
    }
  };
  auto get_list = [&]<typename T>(const char* key, std::vector<T>& out, auto convert) {
    auto it = given.find(key);
    if (it == given.end()) return;
    out.clear();
    for (const auto& item : split_list(it->second)) {
      try {
        out.push_back(convert(item));
      } catch (const std::exception&) {
        issues.push_back(std::string(key) + ": invalid entry '" + item + "'");
      }
    }
    if (out.empty()) issues.push_back(std::string(key) + ": empty list");
  };
  auto to_int = [](const std::string& s) {
    int v = 0;
    if (!parse_number(s, v)) throw InvalidArgument(s);
    return v;
  };
  auto to_double = [](const std::string& s) {
    double v = 0;
    if (!parse_number(s, v)) throw InvalidArgument(s);
    return v;
  };

  get_int("K", c.k);
  get_int("N", c.n);
  get_int("M", c.m);
  get_list("I", c.ac_iterations, to_int);
  get_int("P", c.p);
  get_double("sigma2", c.sigma2);
  get_list("snr_db", c.snr_db, to_double);
  get_list("source_var", c.source_var, to_double);
  get_list("engines", c.engines, [](const std::string& s) { return consensus::engine_from_string(s); });
  get_double("link_failure_prob", c.link_failure_prob);
  get_int("trials", c.trials);
  get_u64("seed", c.seed);
  get_double("topology_radius", c.topology_radius);
  get_u64("topology_seed", c.topology_seed);
  if (auto it = given.find("topology_file"); it != given.end()) c.topology_file = it->second;
  get_list("detectors", c.detectors, [](const std::string& s) { return detection::statistic_from_string(s); });
  get_list("pipelines", c.pipelines, [](const std::string& s) {
    for (auto p : {Pipeline::exact, Pipeline::dpm, Pipeline::dla}) {
      if (to_string(p) == s) return p;
    }
    throw InvalidArgument(s);
  });
  get_list("alphas", c.alphas, to_double);
  get_list("roc_M", c.roc_m, to_int);
  get_int("h0_trials", c.h0_trials);
  get_int("h1_trials", c.h1_trials);
  get_list("eig_indices", c.eig_indices, to_int);
  get_list("algorithms", c.algorithms, [](const std::string& s) {
    if (s == "dpm") return Algorithm::dpm;
    if (s == "dla") return Algorithm::dla;
    throw InvalidArgument(s);
  });
  get_bool("exact_trace", c.exact_trace);
  get_bool("statistic_consensus", c.statistic_consensus);
  get_double("spurious_rel_tol", c.spurious_rel_tol);
  get_int("roc_grid_points", c.roc_grid_points);
  get_int("convergence_K", c.convergence_k);
  get_int("convergence_M", c.convergence_m);
  if (auto it = given.find("output"); it != given.end()) c.output = it->second;

  if (!missing.empty()) issues.insert(issues.begin(), "missing required keys: " + join(missing, ", "));
  if (!issues.empty()) throw ConfigError(std::move(issues));

  apply_defaults(c, given);
  c.validate();
  return c;
}

ExperimentConfig load_config_file(const std::filesystem::path& path, std::optional<Experiment> experiment) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return validate_config(buf.str(), experiment);
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

namespace {

template <typename T>
std::string list_str(const std::vector<T>& values, auto fmt) {
  std::vector<std::string> parts;
  for (const auto& v : values) parts.push_back(fmt(v));
  return join(parts, ",");
}

}  // namespace

std::vector<std::pair<std::string, std::string>> ExperimentConfig::echo() const {
  auto i2s = [](int v) { return std::to_string(v); };
  auto d2s = [](double v) { return format_double(v); };
  return {
      {"experiment", std::string(to_string(experiment))},
      {"K", i2s(k)},
      {"N", i2s(n)},
      {"M", i2s(m)},
      {"I", list_str(ac_iterations, i2s)},
      {"P", i2s(p)},
      {"sigma2", d2s(sigma2)},
      {"snr_db", list_str(snr_db, d2s)},
      {"source_var", list_str(source_var, d2s)},
      {"engines", list_str(engines, [](auto e) { return std::string(consensus::to_string(e)); })},
      {"link_failure_prob", d2s(link_failure_prob)},
      {"trials", i2s(trials)},
      {"seed", std::to_string(seed)},
      {"topology_radius", d2s(topology_radius)},
      {"topology_seed", std::to_string(topology_seed)},
      {"topology_file", topology_file},
      {"detectors", list_str(detectors, [](auto d) { return std::string(detection::to_string(d)); })},
      {"pipelines", list_str(pipelines, [](auto p) { return std::string(to_string(p)); })},
      {"alphas", list_str(alphas, d2s)},
      {"roc_M", list_str(roc_m, i2s)},
      {"h0_trials", i2s(h0_trials)},
      {"h1_trials", i2s(h1_trials)},
      {"eig_indices", list_str(eig_indices, i2s)},
      {"algorithms", list_str(algorithms, [](auto a) { return std::string(to_string(a)); })},
      {"exact_trace", exact_trace ? "true" : "false"},
      {"statistic_consensus", statistic_consensus ? "true" : "false"},
      {"spurious_rel_tol", d2s(spurious_rel_tol)},
      {"roc_grid_points", i2s(roc_grid_points)},
      {"convergence_K", i2s(convergence_k)},
      {"convergence_M", i2s(convergence_m)},
      {"output", output},
  };
}

std::string convergence_csv(const std::vector<ConvergenceRow>& rows) {
  std::string out = "experiment,engine,algorithm,K,N,M,I,trials,eig_index,mse\n";
  for (const auto& r : rows) {
    out += r.experiment + ',' + r.engine + ',' + r.algorithm + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.n) + ',' + std::to_string(r.m) + ',' + std::to_string(r.i) + ',' +
           std::to_string(r.trials) + ',' + std::to_string(r.eig_index) + ',' + format_double(r.mse) + '\n';
  }
  return out;
}

std::string roc_csv(const std::vector<RocRow>& rows) {
  std::string out = "detector,pipeline,threshold,pfa,pd\n";
  for (const auto& r : rows) {
    out += r.detector + ',' + r.pipeline + ',' + format_double(r.threshold) + ',' + format_double(r.pfa) +
           ',' + format_double(r.pd) + '\n';
  }
  return out;
}

std::string audit_csv(const std::vector<AuditRow>& rows) {
  std::string out = "algorithm,node,degree,ac_n_calls,ac_1_calls,units,time_periods\n";
  for (const auto& r : rows) {
    out += r.algorithm + ',' + std::to_string(r.node) + ',' + std::to_string(r.degree) + ',' +
           std::to_string(r.ac_n_calls) + ',' + std::to_string(r.ac_1_calls) + ',' + std::to_string(r.units) +
           ',' + std::to_string(r.time_periods) + '\n';
  }
  return out;
}

std::string prop_csv(const std::vector<PropRow>& rows) {
  std::string out = "check,trial,value,tolerance,passed\n";
  for (const auto& r : rows) {
    out += r.check + ',' + std::to_string(r.trial) + ',' + format_double(r.value) + ',' +
           format_double(r.tolerance) + ',' + (r.passed ? "true" : "false") + '\n';
  }
  return out;
}

std::string report_json(const ExperimentReport& report) {
  nlohmann::ordered_json j;
  nlohmann::ordered_json cfg = nlohmann::ordered_json::object();
  for (const auto& [key, value] : report.config.echo()) cfg[key] = value;
  j["experiment"] = std::string(to_string(report.config.experiment));
  j["config"] = cfg;
  j["ok"] = report.ok;
  j["failures"] = report.failures;
  j["degenerate_runs"] = report.degenerate_runs;
  j["rows"] = {{"convergence", report.convergence.size()},
               {"roc", report.roc.size()},
               {"audit", report.audit.size()},
               {"prop_check", report.props.size()}};
  if (!report.pd_at_alpha.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& p : report.pd_at_alpha) {
      arr.push_back({{"detector", p.detector}, {"pipeline", p.pipeline}, {"alpha", p.alpha}, {"pd", p.pd}});
    }
    j["pd_at_alpha"] = arr;
  }
  if (!report.convergence.empty()) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : report.convergence) {
      if (r.m != report.config.m) continue;
      arr.push_back({{"engine", r.engine}, {"algorithm", r.algorithm}, {"I", r.i}, {"eig_index", r.eig_index},
                     {"mse", r.mse}});
    }
    j["final_mse"] = arr;
  }
  j["trial_seeds"] = report.trial_seeds;
  return j.dump(2) + "\n";
}

std::vector<std::filesystem::path> emit_csv(const ExperimentReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::filesystem::path> written;
  auto write = [&](const std::string& name, const std::string& content) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path.string());
    out << content;
    if (!out) throw Error("write failed for " + path.string());
    written.push_back(path);
  };
  switch (report.config.experiment) {
    case Experiment::ac_compare:
    case Experiment::eig_converge:
    case Experiment::multi_eig: write("convergence.csv", convergence_csv(report.convergence)); break;
    case Experiment::roc: write("roc.csv", roc_csv(report.roc)); break;
    case Experiment::audit_messages: write("audit.csv", audit_csv(report.audit)); break;
    case Experiment::prop_check: write("prop_check.csv", prop_csv(report.props)); break;
  }
  write("report.json", report_json(report));
  nlohmann::ordered_json timing;
  timing["duration_s"] = report.duration_s;
  write("timing.json", timing.dump(2) + "\n");
  return written;
}

}  // namespace eigennet::harness
