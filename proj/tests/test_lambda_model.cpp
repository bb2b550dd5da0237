#include "doctest.h"

#include <cmath>

#include "lambdatune/errors.hpp"
#include "lambdatune/lambda_model.hpp"
#include "support.hpp"

using namespace lambdatune;

namespace {

QdcTable fixture_table() { return QdcTable::load_csv(LAMBDATUNE_DATA_DIR "/qdc_fixture.csv"); }

}  // namespace

TEST_SUITE("lambda_model") {
  TEST_CASE("qp ranges per codec") {
    CHECK(validate_qp(Codec::HEVC, 51));
    CHECK_FALSE(validate_qp(Codec::HEVC, 52));
    CHECK(validate_qp(Codec::AV1, 63));
    CHECK_FALSE(validate_qp(Codec::AV1, 64));
    CHECK(validate_qp(Codec::AV1, 0));
    CHECK_FALSE(validate_qp(Codec::HEVC, -1));
    CHECK_THROWS_AS(require_qp(Codec::HEVC, 52), RangeError);
    CHECK_THROWS_AS(lambda_default(Codec::HEVC, 60), RangeError);
  }

  TEST_CASE("hevc default lambda") {
    CHECK(lambda_default(Codec::HEVC, 12) == 0.57);
    CHECK(lambda_default(Codec::HEVC, 27) == doctest::Approx(18.24).epsilon(1e-15));
    for (int qp = 0; qp + 3 <= 51; ++qp) {
      CAPTURE(qp);
      CHECK(lambda_default(Codec::HEVC, qp + 3) == 2.0 * lambda_default(Codec::HEVC, qp));
      CHECK(lambda_default(Codec::HEVC, qp + 1) > lambda_default(Codec::HEVC, qp));
    }
    for (int qp = 0; qp <= 51; ++qp) {
      const double expected = 0.57 * std::pow(2.0, (qp - 12) / 3.0);
      CHECK(lambda_default(Codec::HEVC, qp) == doctest::Approx(expected).epsilon(1e-14));
    }
  }

  TEST_CASE("av1 default lambda against the fixture table") {
    const Av1LambdaParams params(kAv1AInterFrame, fixture_table());
    int q8 = -1;
    for (int q = 0; q < kAv1QpCount; ++q) {
      if (params.qdc.at(q) == 8.0) {
        q8 = q;
        break;
      }
    }
    REQUIRE(q8 >= 0);
    CHECK(lambda_default(Codec::AV1, q8, params) ==
          doctest::Approx(64.0 * (3.2 + 0.0035 * q8)).epsilon(1e-15));

    double previous = 0.0;
    for (int q = 0; q < kAv1QpCount; ++q) {
      const double lambda = lambda_default(Codec::AV1, q, params);
      CHECK(lambda > 0.0);
      CHECK(lambda >= previous);
      previous = lambda;
    }
    CHECK_THROWS_AS(lambda_default(Codec::AV1, 30), ConfigError);
  }

  TEST_CASE("av1 A constant range") {
    CHECK(default_av1_a(true) == 3.3);
    CHECK(default_av1_a(false) == 3.2);
    CHECK_NOTHROW(Av1LambdaParams(3.25, fixture_table()));
    CHECK_THROWS_AS(Av1LambdaParams(3.4, fixture_table()), ConfigError);
    CHECK_THROWS_AS(Av1LambdaParams(3.1, fixture_table()), ConfigError);
  }

  TEST_CASE("qdc table validation") {
    std::vector<double> ok(64, 4.0);
    CHECK_NOTHROW(QdcTable{ok});
    CHECK_THROWS_AS(QdcTable(std::vector<double>(63, 4.0)), ConfigError);
    auto bad = ok;
    bad[10] = 3.0;
    CHECK_THROWS_AS(QdcTable{bad}, ConfigError);
    bad = ok;
    bad[0] = 0.0;
    CHECK_THROWS_AS(QdcTable{bad}, ConfigError);

    std::string csv = "q_i,q_dc\n";
    for (int q = 0; q < 64; ++q) csv += std::to_string(q) + "," + std::to_string(4 + q) + "\n";
    const auto table = QdcTable::parse_csv(csv);
    CHECK(table.at(10) == 14.0);
    CHECK_THROWS_AS(QdcTable::parse_csv("0,4\n"), ConfigError);
    std::string missing = "q_i,q_dc\n";
    for (int q = 0; q < 63; ++q) missing += std::to_string(q) + ",4\n";
    CHECK_THROWS_AS(QdcTable::parse_csv(missing), ConfigError);
    CHECK_THROWS_AS(QdcTable::load_csv("/nonexistent/qdc.csv"), IoError);
  }

  TEST_CASE("scale lambda") {
    CHECK(scale_lambda(18.24, ScaleFactor(1.0)) == 18.24);
    CHECK(scale_lambda(18.24, ScaleFactor(2.0)) == 36.48);
    CHECK(scale_lambda(0.57, ScaleFactor(3.79)) == doctest::Approx(2.1603).epsilon(1e-12));
    CHECK_THROWS_AS(ScaleFactor(0.0), DomainError);
    CHECK_THROWS_AS(ScaleFactor(-1.0), DomainError);
    CHECK_THROWS_AS(ScaleFactor(std::nan("")), DomainError);
    CHECK_THROWS_AS(scale_lambda(0.0, ScaleFactor(1.0)), DomainError);

    testsupport::Rng rng(7);
    for (int i = 0; i < 200; ++i) {
      const double lambda = rng.log_uniform(0.01, 1e5);
      const double k1 = rng.log_uniform(0.1, 10.0), k2 = rng.log_uniform(0.1, 10.0);
      CHECK(scale_lambda(lambda, ScaleFactor(1.0)) == lambda);
      CHECK(scale_lambda(lambda, ScaleFactor(k1 * k2)) ==
            doctest::Approx(scale_lambda(lambda, ScaleFactor(k1)) * k2).epsilon(1e-14));
    }
  }

  TEST_CASE("frame groups per codec") {
    CHECK(is_valid_group(Codec::AV1, FrameGroup::KF_GF_ARF));
    CHECK_FALSE(is_valid_group(Codec::AV1, FrameGroup::IFrames));
    CHECK(is_valid_group(Codec::HEVC, FrameGroup::BFrames));
    CHECK_FALSE(is_valid_group(Codec::HEVC, FrameGroup::GF_ARF));
    CHECK(is_valid_group(Codec::HEVC, FrameGroup::AllFrames));
    for (auto codec : {Codec::AV1, Codec::HEVC}) {
      for (auto group : groups_for(codec)) {
        CHECK(parse_frame_group(to_string(group)) == group);
      }
      CHECK(parse_codec(to_string(codec)) == codec);
    }
    CHECK(parse_scope("Partition") == Scope::Partition);
    CHECK_THROWS_AS(parse_scope("middle"), ConfigError);
    CHECK_THROWS_AS(parse_codec("VP9"), ConfigError);
  }
}
