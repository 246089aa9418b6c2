#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "pseudomix/cli.hpp"
#include "test_util.hpp"

using namespace pseudomix;
using namespace testutil;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pseudomix_cli_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_state(const std::string& path, BipartiteDims dims, const Mat& m) {
  io::write_state_file(path, {dims, m});
}

cli::DecomposeOptions options(const std::string& in, const std::string& out) {
  cli::DecomposeOptions o;
  o.input = in;
  o.out = out;
  return o;
}

}  // namespace

TEST_CASE("state files round-trip exactly") {
  TempDir tmp;
  const auto rho = random_density<double>({2, 3}, 4, 21);
  write_state(tmp.file("s.json"), rho.dims(), rho.matrix());
  const auto back = io::read_state_file(tmp.file("s.json"));
  CHECK(back.dims == rho.dims());
  CHECK(std::memcmp(back.matrix.data(), rho.matrix().data(), sizeof(cd) * 36) == 0);
  CHECK(io::content_hash(back.dims, back.matrix) == io::content_hash(rho.dims(), rho.matrix()));
}

TEST_CASE("malformed state files are rejected") {
  using io::Json;
  Json j = io::state_to_json({{2, 2}, bell()});
  CHECK_NOTHROW(io::state_from_json(j));
  Json wrong_rows = j;
  wrong_rows["matrix"].erase(0);
  CHECK_THROWS_AS(io::state_from_json(wrong_rows), invalid_input);
  Json wrong_entry = j;
  wrong_entry["matrix"][0][0] = Json::array({1.0});
  CHECK_THROWS_AS(io::state_from_json(wrong_entry), invalid_input);
  Json no_dim = j;
  no_dim.erase("d2");
  CHECK_THROWS_AS(io::state_from_json(no_dim), invalid_input);
  Json neg = j;
  neg["d1"] = -2;
  CHECK_THROWS_AS(io::state_from_json(neg), invalid_input);
}

TEST_CASE("random then validate") {
  TempDir tmp;
  std::ostringstream out, err;
  CHECK(cli::cmd_random(2, 3, 4, 7, tmp.file("r.json"), out, err) == cli::kOk);
  CHECK(cli::cmd_validate(tmp.file("r.json"), out, err) == cli::kOk);
  CHECK(cli::cmd_random(2, 3, 7, 7, tmp.file("bad.json"), out, err) == cli::kInvalidInput);
}

TEST_CASE("validate reports NPT Werner states and invalid matrices") {
  TempDir tmp;
  write_state(tmp.file("w.json"), {2, 2}, werner(0.5));
  std::ostringstream out, err;
  CHECK(cli::cmd_validate(tmp.file("w.json"), out, err) == cli::kOk);
  CHECK(out.str().find("ppt: NPT") != std::string::npos);

  Mat nonherm = Mat::Identity(4, 4) / 4.0;
  nonherm(0, 3) = 0.1;
  write_state(tmp.file("n.json"), {2, 2}, nonherm);
  std::ostringstream out2;
  CHECK(cli::cmd_validate(tmp.file("n.json"), out2, err) == cli::kInvalidInput);
  CHECK(out2.str().find("not Hermitian") != std::string::npos);
  CHECK(cli::cmd_validate(tmp.file("missing.json"), out2, err) == cli::kInvalidInput);
}

TEST_CASE("decompose Bell, then verify") {
  TempDir tmp;
  write_state(tmp.file("bell.json"), {2, 2}, bell());
  std::ostringstream out, err;
  REQUIRE(cli::cmd_decompose(options(tmp.file("bell.json"), tmp.file("rep.json")), out, err) ==
          cli::kOk);
  const auto report = io::read_json_file(tmp.file("rep.json"));
  const double a = report.at("a").get<double>(), b = report.at("b").get<double>();
  CHECK(std::abs(a - b - 1) <= 1e-9);
  CHECK(b > 1e-3);
  CHECK(report.at("converged").get<bool>());
  CHECK(report.at("ppt").at("verdict") == "NPT");
  CHECK(report.at("config").at("search").at("restarts") == 8);

  std::ostringstream vout;
  CHECK(cli::cmd_verify(tmp.file("bell.json"), tmp.file("rep.json"), vout, err) == cli::kOk);
  CHECK(vout.str().find("FAIL") == std::string::npos);
}

TEST_CASE("decompose is byte-deterministic, including with threads") {
  TempDir tmp;
  const auto rho = random_density<double>({2, 3}, 6, 5);
  write_state(tmp.file("s.json"), rho.dims(), rho.matrix());
  std::ostringstream out, err;
  auto o = options(tmp.file("s.json"), tmp.file("a.json"));
  REQUIRE(cli::cmd_decompose(o, out, err) == cli::kOk);
  o.out = tmp.file("b.json");
  REQUIRE(cli::cmd_decompose(o, out, err) == cli::kOk);
  o.out = tmp.file("c.json");
  o.threads = 3;
  REQUIRE(cli::cmd_decompose(o, out, err) == cli::kOk);
  CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("b.json")));
  CHECK(slurp(tmp.file("a.json")) == slurp(tmp.file("c.json")));
}

TEST_CASE("decompose exit codes") {
  TempDir tmp;
  std::ostringstream out, err;
  // Wrong row count.
  auto j = io::state_to_json({{2, 2}, bell()});
  j["matrix"].erase(3);
  io::write_json_file(tmp.file("short.json"), j);
  CHECK(cli::cmd_decompose(options(tmp.file("short.json"), tmp.file("r1.json")), out, err) ==
        cli::kInvalidInput);
  CHECK_FALSE(fs::exists(tmp.file("r1.json")));

  // Not a density matrix.
  write_state(tmp.file("big.json"), {2, 2}, Mat::Identity(4, 4));
  CHECK(cli::cmd_decompose(options(tmp.file("big.json"), tmp.file("r2.json")), out, err) ==
        cli::kInvalidInput);
  CHECK(cli::cmd_decompose(options(tmp.file("nope.json"), tmp.file("r3.json")), out, err) ==
        cli::kInvalidInput);

  // Step budget exhausted: report still written.
  write_state(tmp.file("bell.json"), {2, 2}, bell());
  auto o = options(tmp.file("bell.json"), tmp.file("r4.json"));
  o.max_steps = 1;
  CHECK(cli::cmd_decompose(o, out, err) == cli::kNotConverged);
  REQUIRE(fs::exists(tmp.file("r4.json")));
  CHECK_FALSE(io::read_json_file(tmp.file("r4.json")).at("converged").get<bool>());

  o.restarts = 0;
  CHECK(cli::cmd_decompose(o, out, err) == cli::kInvalidInput);
}

TEST_CASE("verify catches tampered or mismatched reports") {
  TempDir tmp;
  write_state(tmp.file("bell.json"), {2, 2}, bell());
  write_state(tmp.file("mixed.json"), {2, 2}, Mat::Identity(4, 4) / 4.0);
  std::ostringstream out, err;
  REQUIRE(cli::cmd_decompose(options(tmp.file("bell.json"), tmp.file("rep.json")), out, err) ==
          cli::kOk);

  auto report = io::read_json_file(tmp.file("rep.json"));
  auto tampered = report;
  tampered["terms_plus"][0]["weight"] = -tampered["terms_plus"][0]["weight"].get<double>();
  io::write_json_file(tmp.file("tampered.json"), tampered);
  CHECK(cli::cmd_verify(tmp.file("bell.json"), tmp.file("tampered.json"), out, err) ==
        cli::kVerifyFailed);

  auto shifted = report;
  shifted["residual_hs"] = shifted["residual_hs"].get<double>() * 2 + 1e-12;
  io::write_json_file(tmp.file("shifted.json"), shifted);
  CHECK(cli::cmd_verify(tmp.file("bell.json"), tmp.file("shifted.json"), out, err) ==
        cli::kVerifyFailed);

  CHECK(cli::cmd_verify(tmp.file("mixed.json"), tmp.file("rep.json"), out, err) ==
        cli::kVerifyFailed);
  CHECK(cli::cmd_verify(tmp.file("bell.json"), tmp.file("absent.json"), out, err) ==
        cli::kInvalidInput);
}

TEST_CASE("argv dispatch") {
  TempDir tmp;
  const std::string state = tmp.file("s.json");
  const std::string rep = tmp.file("r.json");
  auto call = [](std::vector<std::string> args) {
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    return cli::run(static_cast<int>(argv.size()), argv.data());
  };
  CHECK(call({"pseudomix", "random", "--d1", "2", "--d2", "2", "--rank", "2", "--seed", "3",
              "--out", state}) == 0);
  CHECK(call({"pseudomix", "decompose", "--input", state, "--out", rep, "--coalesce"}) == 0);
  CHECK(io::read_json_file(rep).at("config").at("coalesce").get<bool>());
  CHECK(call({"pseudomix", "verify", "--input", state, "--report", rep}) == 0);
  CHECK(call({"pseudomix", "decompose", "--input", state}) == cli::kInvalidInput);
  CHECK(call({"pseudomix", "bogus"}) == cli::kInvalidInput);
}
