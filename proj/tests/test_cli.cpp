#ifdef SEPCERT_CLI_PATH

#include <doctest.h>

#include <sys/wait.h>

#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "sepcert/decomp.hpp"
#include "sepcert/ds_state.hpp"

namespace {

struct CliResult {
  int exit_code;
  std::string output;
};

CliResult run_cli(const std::string& args, bool merge_stderr = false) {
  const std::string cmd = std::string(SEPCERT_CLI_PATH) + " " + args +
                          (merge_stderr ? " 2>&1" : " 2>/dev/null");
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string output;
  char buf[4096];
  std::size_t got = 0;
  while ((got = std::fread(buf, 1, sizeof(buf), pipe)) > 0) output.append(buf, got);
  const int status = pclose(pipe);
  const int exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {exit_code, output};
}

std::filesystem::path test_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "sepcert_cli_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

std::string write_bipartite_file(const std::string& name, int d,
                                 const std::vector<std::tuple<int, int, double>>& entries,
                                 bool normalized) {
  nlohmann::json j;
  j["version"] = "1";
  j["kind"] = "bipartite_ds";
  j["d"] = d;
  j["normalized"] = normalized;
  j["entries"] = nlohmann::json::array();
  for (const auto& [i, jj, w] : entries) {
    j["entries"].push_back({{"i", i}, {"j", jj}, {"w", w}});
  }
  const auto path = test_dir() / name;
  std::ofstream out(path);
  out << j.dump(2);
  return path.string();
}

std::string example2_file() {
  return write_bipartite_file("example2.json", 3,
                              {{0, 0, 0.19},
                               {0, 1, 0.16},
                               {0, 2, 0.23},
                               {1, 1, 0.064},
                               {1, 2, 0.16},
                               {2, 2, 0.196}},
                              true);
}

std::string entangled_m5_file() {
  return write_bipartite_file("entangled_m5.json", 5,
                              {{0, 0, 1.0},
                               {1, 1, 2.0},
                               {2, 2, 2.0},
                               {3, 3, 1.0},
                               {4, 4, 3.0},
                               {0, 1, 2.0},
                               {1, 2, 2.0},
                               {2, 3, 2.0},
                               {3, 4, 2.0},
                               {0, 4, 2.0}},
                              false);
}

sepcert::DsState example2_state() {
  sepcert::WeightMap p;
  p[{0, 0}] = 0.19;
  p[{0, 1}] = 0.16;
  p[{0, 2}] = 0.23;
  p[{1, 1}] = 0.064;
  p[{1, 2}] = 0.16;
  p[{2, 2}] = 0.196;
  return sepcert::DsState::create(3, p, true);
}

sepcert::SeparableDecomposition decomposition_from_json(const nlohmann::json& terms) {
  sepcert::SeparableDecomposition dec;
  for (const auto& term : terms) {
    sepcert::SeparableDecomposition::Term t;
    t.weight = term.at("weight").get<double>();
    const auto& ket = term.at("ket");
    t.ket = Eigen::VectorXcd(static_cast<int>(ket.size()));
    for (int i = 0; i < t.ket.size(); ++i) {
      t.ket(i) = std::complex<double>(ket.at(i).at(0).get<double>(),
                                      ket.at(i).at(1).get<double>());
    }
    dec.terms.push_back(std::move(t));
  }
  return dec;
}

}  // namespace

TEST_CASE("cli analyze certifies the separable 3x3 example") {
  const std::string file = example2_file();
  const CliResult res = run_cli("analyze " + file + " --json");
  CHECK(res.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("verdict") == "Separable");
  CHECK(report.at("kind") == "bipartite_ds");
  CHECK(report.at("evidence").at("type") == "decomposition");

  // Evidence terms re-verify on load.
  const auto dec = decomposition_from_json(report.at("evidence").at("terms"));
  CHECK(sepcert::verify_decomposition(example2_state(), dec, sepcert::Tolerance{}));
}

TEST_CASE("cli analyze flags the entangled 5x5 state with a witness") {
  const std::string file = entangled_m5_file();
  const CliResult res = run_cli("analyze " + file + " --json");
  CHECK(res.exit_code == 1);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("verdict") == "Entangled");
  CHECK(report.at("evidence").at("type") == "witness_violation");
  CHECK(std::abs(report.at("evidence").at("value").get<double>() + 1.0) <= 1e-9);
}

TEST_CASE("cli analyze accepts unnormalized input with --normalize") {
  const std::string file = write_bipartite_file("example2_scaled.json", 3,
                                                {{0, 0, 0.76},
                                                 {0, 1, 0.64},
                                                 {0, 2, 0.92},
                                                 {1, 1, 0.256},
                                                 {1, 2, 0.64},
                                                 {2, 2, 0.784}},
                                                false);
  const CliResult res = run_cli("analyze " + file + " --normalize --json");
  CHECK(res.exit_code == 0);
  CHECK(nlohmann::json::parse(res.output).at("verdict") == "Separable");
}

TEST_CASE("cli analyze reports parse failures with exit 64") {
  const auto bad = test_dir() / "malformed.json";
  std::ofstream(bad) << "{this is not json";
  CHECK(run_cli("analyze " + bad.string()).exit_code == 64);

  const auto unknown = test_dir() / "unknown_kind.json";
  std::ofstream(unknown) << "{\"kind\": \"mystery\"}";
  CHECK(run_cli("analyze " + unknown.string()).exit_code == 64);

  CHECK(run_cli("analyze " + (test_dir() / "no_such_file.json").string()).exit_code == 64);
  CHECK(run_cli("").exit_code == 64);
}

TEST_CASE("cli json reports are byte-identical across runs") {
  const std::string file = example2_file();
  const CliResult first = run_cli("analyze " + file + " --json --seed 7");
  const CliResult second = run_cli("analyze " + file + " --json --seed 7");
  CHECK(first.exit_code == 0);
  CHECK(first.output == second.output);

  const std::string m5 = entangled_m5_file();
  CHECK(run_cli("analyze " + m5 + " --json").output ==
        run_cli("analyze " + m5 + " --json").output);
}

TEST_CASE("cli analyze writes reports to --out") {
  const std::string file = example2_file();
  const auto out_path = test_dir() / "report.json";
  std::filesystem::remove(out_path);
  const CliResult res = run_cli("analyze " + file + " --json --out " + out_path.string());
  CHECK(res.exit_code == 0);
  CHECK(res.output.empty());
  std::ifstream in(out_path);
  REQUIRE(in.good());
  const nlohmann::json report = nlohmann::json::parse(in);
  CHECK(report.at("verdict") == "Separable");
}

TEST_CASE("cli witness reproduces the projector-subtraction evaluation") {
  const std::string file = write_bipartite_file("hat_m5.json", 5,
                                                {{0, 0, 1.0},
                                                 {1, 1, 2.0},
                                                 {2, 2, 2.0},
                                                 {3, 3, 2.0},
                                                 {4, 4, 6.0},
                                                 {0, 1, 2.0},
                                                 {1, 2, 2.0},
                                                 {2, 3, 2.0},
                                                 {3, 4, 2.0},
                                                 {0, 4, 2.0}},
                                                false);
  const CliResult res = run_cli("witness " + file +
                                " --projector 0.1875:1,0,0,0,1"
                                " --projector 0.0625:1,0,0,0,9 --json");
  CHECK(res.exit_code == 1);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(std::abs(report.at("value").get<double>() + 1.0) <= 1e-9);
  CHECK(report.at("certifies_entanglement") == true);
}

TEST_CASE("cli witness stays nonnegative on a completely positive state") {
  // M = B B^T for an entrywise nonnegative B never violates the witness.
  Eigen::MatrixXd b(5, 3);
  b << 1.0, 0.5, 0.0,
       0.2, 1.0, 0.3,
       0.0, 0.4, 1.0,
       0.7, 0.0, 0.6,
       0.3, 0.3, 0.3;
  const Eigen::MatrixXd m = b * b.transpose();
  std::vector<std::tuple<int, int, double>> entries;
  for (int i = 0; i < 5; ++i) {
    entries.emplace_back(i, i, m(i, i));
    for (int j = i + 1; j < 5; ++j) {
      if (m(i, j) != 0.0) entries.emplace_back(i, j, 2.0 * m(i, j));
    }
  }
  const std::string file = write_bipartite_file("cp_gram.json", 5, entries, false);
  const CliResult res = run_cli("witness " + file + " --json");
  CHECK(res.exit_code == 2);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("value").get<double>() >= -1e-12);
  CHECK(report.at("certifies_entanglement") == false);
}

TEST_CASE("cli witness rejects a 5-subset on a 4x4 state") {
  const std::string file = write_bipartite_file(
      "d4_state.json", 4, {{0, 0, 1.0}, {1, 1, 1.0}, {2, 2, 1.0}, {3, 3, 1.0}}, false);
  CHECK(run_cli("witness " + file + " --subset 0,1,2,3,4").exit_code == 65);
  CHECK(run_cli("witness " + file).exit_code == 65);
}

TEST_CASE("cli family reports the 5-qubit family analysis") {
  const CliResult res = run_cli("family --n 5 --z 1 --sigma 1 --report all --json");
  CHECK(res.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("ppt_all_bipartitions") == true);
  CHECK(report.at("ranks") == nlohmann::json({6, 10, 9}));
  CHECK(report.at("extremality_dimension") == 1);
  CHECK(report.at("trace_check").at("relative_error").get<double>() <= 1e-9);
  CHECK(report.at("trace_check").at("expected").get<double>() ==
        doctest::Approx(50.0).epsilon(1e-12));
}

TEST_CASE("cli family trace check with n = 7 and z = 10") {
  const CliResult res = run_cli("family --n 7 --z 10 --sigma -1 --json");
  CHECK(res.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("trace_check").at("expected").get<double>() ==
        doctest::Approx(2.0 * 14.0 * 14.0 * 14.0).epsilon(1e-12));
  CHECK(report.at("trace_check").at("relative_error").get<double>() <= 1e-9);
}

TEST_CASE("cli family rejects even qubit counts and hints at example4") {
  const CliResult res = run_cli("family --n 4 --z 1", true);
  CHECK(res.exit_code == 65);
  CHECK(res.output.find("example4") != std::string::npos);
}

TEST_CASE("cli family --emit round-trips through analyze") {
  const auto emitted = test_dir() / "family5.json";
  std::filesystem::remove(emitted);
  CHECK(run_cli("family --n 5 --z 1 --sigma 1 --report ppt --emit " + emitted.string())
            .exit_code == 0);

  const CliResult res = run_cli("analyze " + emitted.string() + " --json");
  CHECK(res.exit_code == 1);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("verdict") == "Entangled");
  CHECK(report.at("ppt_all_bipartitions") == true);
  CHECK(report.at("reason") == "extremal PPT state of rank above 1");
  CHECK(report.at("ranks") == nlohmann::json({6, 10, 9}));
}

TEST_CASE("cli example4 reports the printed 4-qubit state") {
  const CliResult res = run_cli("example4 --json");
  CHECK(res.exit_code == 0);
  const nlohmann::json report = nlohmann::json::parse(res.output);
  CHECK(report.at("ppt_all_bipartitions") == true);
  CHECK(report.at("ranks") == nlohmann::json({5, 7, 8}));
  CHECK(report.at("extremality_dimension") == 1);
  CHECK(report.at("trace_check").at("relative_error").get<double>() <= 1e-12);
}

TEST_CASE("cli decompose writes a decomposition that re-verifies on load") {
  const std::string file = example2_file();
  const CliResult res = run_cli("decompose " + file + " --method auto");
  CHECK(res.exit_code == 0);
  const nlohmann::json out = nlohmann::json::parse(res.output);
  CHECK(out.at("kind") == "separable_decomposition");
  CHECK(out.at("d") == 3);
  const auto dec = decomposition_from_json(out.at("decomposition").at("terms"));
  CHECK_FALSE(dec.terms.empty());
  CHECK(sepcert::verify_decomposition(example2_state(), dec, sepcert::Tolerance{}));
}

TEST_CASE("cli decompose refuses the entangled state with exit 3") {
  CHECK(run_cli("decompose " + entangled_m5_file() + " --method auto").exit_code == 3);
  CHECK(run_cli("decompose " + example2_file() + " --method bogus").exit_code == 65);
}

TEST_CASE("cli decompose handles the all-ones state") {
  // State with every weight present: p_ii = 1, p_ij = 2 at d = 3.
  const std::string file = write_bipartite_file("all_ones3.json", 3,
                                                {{0, 0, 1.0},
                                                 {1, 1, 1.0},
                                                 {2, 2, 1.0},
                                                 {0, 1, 2.0},
                                                 {0, 2, 2.0},
                                                 {1, 2, 2.0}},
                                                false);
  const CliResult res = run_cli("decompose " + file + " --method auto");
  CHECK(res.exit_code == 0);
  const nlohmann::json out = nlohmann::json::parse(res.output);
  const auto dec = decomposition_from_json(out.at("decomposition").at("terms"));
  CHECK(sepcert::verify_decomposition(sepcert::all_ones_state(3), dec,
                                      sepcert::Tolerance{}));
}

#endif  // SEPCERT_CLI_PATH
