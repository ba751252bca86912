#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "eigennet/harness.hpp"

using namespace eigennet;
using namespace eigennet::harness;

namespace {

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int line_count(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("eigennet_test_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

ExperimentConfig tiny(Experiment e) {
  ExperimentConfig c = validate_config("experiment = " + std::string(to_string(e)) +
                                       "\nK = 10\nN = 4\nM = 3\nI = 4\nsnr_db = 3\ntrials = 3\n"
                                       "topology_radius = 0.7\nalphas = 0.5\n");
  return c;
}

}  // namespace

TEST_CASE("minimal roc config takes the defaults") {
  const auto c = validate_config("experiment = roc\nsnr_db = 7\n");
  CHECK(c.experiment == Experiment::roc);
  CHECK(c.k == 40);
  CHECK(c.n == 10);
  CHECK(c.sigma2 == 1.0);
  CHECK(c.p == 1);
  CHECK(c.h0_trials == c.trials);
  REQUIRE(c.roc_m.size() == 1);
  CHECK(c.roc_m[0] == c.m);
}

TEST_CASE("config validation errors") {
  CHECK_THROWS_AS(validate_config("experiment = roc\nsnr_db = 7\ntrials = 0\n"), ConfigError);
  CHECK_THROWS_AS(validate_config("experiment = roc\nsnr_db = 7\nalphas = 1.5\n"), ConfigError);
  CHECK_THROWS_AS(validate_config("experiment = roc\nsnr_db = 7\nbogus = 1\n"), ConfigError);
  CHECK_THROWS_AS(validate_config("experiment = roc\nsnr_db = 7\nK = ten\n"), ConfigError);
  CHECK_THROWS_AS(validate_config("experiment = roc\nsnr_db = 7\nK = 4\nK = 5\n"), ConfigError);
  CHECK_THROWS_AS(validate_config("experiment = roc\n", Experiment::ac_compare), ConfigError);

  try {
    validate_config("K = 40\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    // Both missing keys are reported together.
    CHECK(e.issues().size() >= 1);
    const std::string all = e.what();
    CHECK(all.find("experiment") != std::string::npos);
  }
  try {
    validate_config("experiment = multi-eig\n");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("snr_db") != std::string::npos);
  }
}

TEST_CASE("comments, whitespace and the experiment override") {
  const auto c = validate_config("# header\n\n  K =  12  # trailing\nN=3\nM = 4\n", Experiment::audit_messages);
  CHECK(c.experiment == Experiment::audit_messages);
  CHECK(c.k == 12);
  CHECK(c.n == 3);
}

TEST_CASE("csv shapes") {
  CHECK(convergence_csv({}) == "experiment,engine,algorithm,K,N,M,I,trials,eig_index,mse\n");
  CHECK(line_count(roc_csv({})) == 1);
  CHECK(line_count(audit_csv({})) == 1);
  const auto one = roc_csv({RocRow{"RT", "exact", 1.5, 0.25, 0.75}});
  CHECK(line_count(one) == 2);
  CHECK(one.substr(one.find('\n') + 1) == "RT,exact,1.5,0.25,0.75\n");
}

TEST_CASE("shortest round-trip floats") {
  CHECK(format_double(0.1) == "0.1");
  CHECK(format_double(1e-20) == "1e-20");
  CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("rows echo the validated config") {
  const auto c = tiny(Experiment::eig_converge);
  const auto report = run(c);
  REQUIRE(!report.convergence.empty());
  for (const auto& row : report.convergence) {
    CHECK(row.k == c.k);
    CHECK(row.n == c.n);
    CHECK(row.trials == c.trials);
    CHECK(row.m >= 1);
    CHECK(row.m <= c.m);
  }
  CHECK(report.trial_seeds.size() == 3);
}

TEST_CASE("trial seeds do not depend on the trial count") {
  auto c = tiny(Experiment::ac_compare);
  const auto a = run(c);
  c.trials = 5;
  const auto b = run(c);
  for (std::size_t i = 0; i < a.trial_seeds.size(); ++i) CHECK(a.trial_seeds[i] == b.trial_seeds[i]);
}

TEST_CASE("re-running writes byte-identical files") {
  for (auto e : {Experiment::ac_compare, Experiment::roc, Experiment::audit_messages}) {
    const auto c = tiny(e);
    const auto d1 = scratch("a");
    const auto d2 = scratch("b");
    const auto files = emit_csv(run(c), d1);
    emit_csv(run(c), d2);
    REQUIRE(files.size() >= 2);
    for (const auto& f : files) {
      if (f.filename() == "timing.json") continue;
      CHECK(slurp(f) == slurp(d2 / f.filename()));
    }
    std::filesystem::remove_all(d1);
    std::filesystem::remove_all(d2);
  }
}

TEST_CASE("audit experiment agrees with the formulas") {
  const auto report = run(tiny(Experiment::audit_messages));
  CHECK(report.ok);
  CHECK(report.audit.size() == 20);
}

TEST_CASE("topology size must match K") {
  auto c = tiny(Experiment::ac_compare);
  const auto path = std::filesystem::temp_directory_path() / "eigennet_test_graph.txt";
  std::ofstream(path) << "3\n0 1\n1 2\n";
  c.topology_file = path.string();
  CHECK_THROWS_AS(run(c), InvalidArgument);
  std::filesystem::remove(path);
}
