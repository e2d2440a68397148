#include <doctest.h>

#include "arnn/errors.hpp"
#include "arnn/model.hpp"

using namespace arnn;

TEST_SUITE("model") {
  TEST_CASE("neutral model has half-rate weights and zero diagonals") {
    const auto m = ArnnModel::neutral(3, 1.0);
    CHECK(m.size() == 3);
    CHECK(m.total_rate() == 1.0);
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 3; ++j) {
        const auto a = static_cast<Eigen::Index>(i);
        const auto b = static_cast<Eigen::Index>(j);
        const double expected = i == j ? 0.0 : 0.5;
        CHECK(m.wx_plus()(a, b) == expected);
        CHECK(m.wy_plus()(a, b) == expected);
      }
    }
  }

  TEST_CASE("neutral model scales with W") {
    const auto m = ArnnModel::neutral(4, 2.5);
    CHECK(m.wx_plus()(0, 1) == 1.25);
    CHECK(m.wx_minus(0, 1) == 1.25);
    CHECK(m.wy_minus(2, 3) == 1.25);
  }

  TEST_CASE("single node is rejected") {
    CHECK_THROWS_AS(ArnnModel::neutral(1, 1.0), InvalidSizeError);
    CHECK_THROWS_AS(ArnnModel::neutral(0, 1.0), InvalidSizeError);
  }

  TEST_CASE("non-positive total rate is rejected") {
    CHECK_THROWS_AS(ArnnModel::neutral(3, 0.0), InvalidParameterError);
    CHECK_THROWS_AS(ArnnModel::neutral(3, -1.0), InvalidParameterError);
  }

  TEST_CASE("constructor enforces the weight box") {
    Matrix wx = Matrix::Constant(2, 2, 0.5);
    wx.diagonal().setZero();
    Matrix wy = wx;
    CHECK_NOTHROW(ArnnModel(1.0, wx, wy));

    Matrix diag = wx;
    diag(0, 0) = 0.1;
    CHECK_THROWS_AS(ArnnModel(1.0, diag, wy), InvalidParameterError);

    Matrix negative = wx;
    negative(0, 1) = -0.01;
    CHECK_THROWS_AS(ArnnModel(1.0, negative, wy), InvalidParameterError);

    Matrix too_big = wy;
    too_big(1, 0) = 1.01;
    CHECK_THROWS_AS(ArnnModel(1.0, wx, too_big), InvalidParameterError);

    CHECK_NOTHROW(ArnnModel(1.0, Matrix{{0.0, 1.0}, {0.0, 0.0}}, wy));
  }

  TEST_CASE("constructor rejects mismatched shapes") {
    Matrix a = Matrix::Zero(2, 2);
    Matrix b = Matrix::Zero(3, 3);
    CHECK_THROWS_AS(ArnnModel(1.0, a, b), InvalidSizeError);
    CHECK_THROWS_AS(ArnnModel(1.0, Matrix::Zero(2, 3), Matrix::Zero(2, 3)), InvalidSizeError);
  }

  TEST_CASE("inhibitory weights are implied") {
    Matrix wx{{0.0, 0.2}, {0.7, 0.0}};
    Matrix wy{{0.0, 0.9}, {0.4, 0.0}};
    ArnnModel m(1.0, wx, wy);
    CHECK(m.wx_minus(0, 1) == doctest::Approx(0.8));
    CHECK(m.wx_minus(1, 0) == doctest::Approx(0.3));
    CHECK(m.wy_minus(0, 1) == doctest::Approx(0.1));
    CHECK(m.wx_minus(0, 0) == 0.0);
  }

  TEST_CASE("with_weights revalidates and equality compares values") {
    const auto m = ArnnModel::neutral(2);
    Matrix bad = Matrix::Constant(2, 2, 2.0);
    bad.diagonal().setZero();
    CHECK_THROWS_AS(m.with_weights(bad, m.wy_plus()), InvalidParameterError);
    CHECK(m.with_weights(m.wx_plus(), m.wy_plus()) == m);
    Matrix other = m.wx_plus();
    other(0, 1) = 0.25;
    CHECK_FALSE(m.with_weights(other, m.wy_plus()) == m);
  }

  TEST_CASE("external inputs from attack ratios") {
    Vector a(3);
    a << 0.0, 0.25, 1.0;
    const auto in = ExternalInputs::from_attack_ratio(a);
    CHECK(in.compromised(1) == 0.25);
    CHECK(in.safe(1) == 0.75);
    CHECK(in.safe(2) == 0.0);
    CHECK_NOTHROW(in.validate(3));
    CHECK_THROWS_AS(in.validate(4), InvalidSizeError);
  }

  TEST_CASE("neutral inputs") {
    const auto in = ExternalInputs::neutral(5, 2.0);
    for (Eigen::Index i = 0; i < 5; ++i) {
      CHECK(in.compromised(i) == doctest::Approx(0.75 * 2.0 * 4));
      CHECK(in.safe(i) == doctest::Approx(6.0));
    }
  }

  TEST_CASE("negative or non-finite inputs are rejected") {
    ExternalInputs in{Vector::Constant(2, 0.5), Vector::Constant(2, 0.5)};
    in.safe(1) = -0.1;
    CHECK_THROWS_AS(in.validate(2), InvalidParameterError);
    in.safe(1) = std::numeric_limits<double>::infinity();
    CHECK_THROWS_AS(in.validate(2), InvalidParameterError);
  }
}
