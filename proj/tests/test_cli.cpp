#include "doctest.h"

#include <cmath>
#include <regex>
#include <sstream>

#include "lambdatune/cli.hpp"
#include "lambdatune/serialization.hpp"
#include "support.hpp"

using namespace lambdatune;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = cli_dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("bdrate of identical curves") {
    const auto dir = testsupport::scratch_dir("cli-bdrate");
    const auto curve = testsupport::make_curve({27, 39, 49, 59, 63}, {3000, 1100, 420, 160, 110},
                                               {18.0, 14.2, 11.1, 8.2, 7.0});
    write_json_file(dir / "a.json", nlohmann::json(curve));
    const auto r = run({"bdrate", (dir / "a.json").string(), (dir / "a.json").string()});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("BD-Rate: 0.00%") != std::string::npos);
    CHECK(r.out.find("BD-MS-SSIM: 0.0000 dB") != std::string::npos);

    const auto missing = run({"bdrate", (dir / "a.json").string(), (dir / "nope.json").string()});
    CHECK(missing.code == kExitFailure);
    CHECK(missing.err.find("nope.json") != std::string::npos);
  }

  TEST_CASE("optimize the default synthetic clip") {
    const auto dir = testsupport::scratch_dir("cli-optimize");
    const auto r = run({"optimize", "--synthetic", "default", "--group", "KF_GF_ARF", "--out",
                        dir.string(), "--cache-dir", (dir / "cache").string()});
    REQUIRE(r.code == kExitOk);
    std::smatch m;
    REQUIRE(std::regex_search(r.out, m, std::regex(R"(k_hat=([0-9.]+) bd_rate=(-?[0-9.]+)%)")));
    const auto grid = testsupport::grid_oracle(testsupport::ModelParams{}, {27, 39, 49, 59, 63});
    CHECK(std::fabs(std::stod(m[1].str()) - grid.k) <= 0.15);
    CHECK(std::stod(m[2].str()) < 0.0);
    CHECK(r.out.find("status=converged") != std::string::npos);
    const auto result = load_result(dir / "synthetic_AV1_KF_GF_ARF_Top.json");
    CHECK(result.clip_id == "synthetic");

    const auto report = run({"report", dir.string(), "--format", "csv"});
    CHECK(report.code == kExitOk);
    CHECK(report.out.find("AV1,Top,KF_GF_ARF,1,") != std::string::npos);

    const auto sweep = run({"sweep", "--synthetic", "default", "--k", "1,2.5", "--no-cache", "--out",
                            dir.string()});
    CHECK(sweep.code == kExitOk);
    const auto plot = run({"plot", (dir / "synthetic_k1.json").string(),
                           (dir / "synthetic_k2.5.json").string(), "--out",
                           (dir / "rd.svg").string()});
    CAPTURE(plot.err);
    CHECK(plot.code == kExitOk);
    CHECK(testsupport::read_text(dir / "rd.svg").find("<svg") != std::string::npos);
  }

  TEST_CASE("errors and exit codes") {
    const auto missing = run({"optimize", "--manifest", "/nonexistent/clips.json", "--encoder-template",
                              "enc {input} {output} {qp} {k}", "--metric-template",
                              "m {reference} {distorted} {report}"});
    CHECK(missing.code == kExitFailure);
    CHECK(missing.err.find("error [manifest]") != std::string::npos);
    CHECK(missing.err.find("/nonexistent/clips.json") != std::string::npos);

    CHECK(run({"optimize", "--synthetic", "default", "--bogus"}).code == kExitUsage);
    CHECK(run({"frobnicate"}).code == kExitUsage);
    CHECK(run({}).code == kExitUsage);
    CHECK(run({"optimize"}).code == kExitUsage);
    CHECK(run({"optimize", "--synthetic", "default", "--codec", "VP9"}).code == kExitUsage);
    CHECK(run({"--help"}).code == kExitOk);
  }
}
