#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "arnn/errors.hpp"
#include "arnn/learning.hpp"
#include "oracles.hpp"

using namespace arnn;

namespace {

ExternalInputs inputs_of(const TrainingSample& s) { return ExternalInputs::from_attack_ratio(s.attack_ratio); }

double max_abs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }

void check_box(const ArnnModel& m) {
  CHECK(m.wx_plus().minCoeff() >= 0.0);
  CHECK(m.wy_plus().minCoeff() >= 0.0);
  CHECK(m.wx_plus().maxCoeff() <= m.total_rate());
  CHECK(m.wy_plus().maxCoeff() <= m.total_rate());
  CHECK(m.wx_plus().diagonal().cwiseAbs().maxCoeff() == 0.0);
  CHECK(m.wy_plus().diagonal().cwiseAbs().maxCoeff() == 0.0);
}

std::vector<TrainingSample> separable_stream(std::size_t n, std::size_t slots, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> noise(0.0, 0.05);
  std::vector<TrainingSample> out;
  for (std::size_t l = 0; l < slots; ++l) {
    Vector a(static_cast<Eigen::Index>(n)), k(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
      const bool bot = i < n / 2;
      a(static_cast<Eigen::Index>(i)) = bot ? 0.8 + noise(rng) : noise(rng);
      k(static_cast<Eigen::Index>(i)) = bot ? 1.0 : 0.0;
    }
    out.push_back({a, k, static_cast<long>(l + 1)});
  }
  return out;
}

}  // namespace

TEST_SUITE("learning") {
  TEST_CASE("neutral workspace is fully symmetric") {
    const auto m = ArnnModel::neutral(2);
    const auto in = ExternalInputs::neutral(2, 1.0);
    const auto s = solve_fixed_point(m, in);
    const auto ws = build_workspace(m, in, s);
    CHECK(ws.D(0) == doctest::Approx(ws.D(1)));
    CHECK(ws.d(0) == doctest::Approx(ws.d(1)));
    CHECK(max_abs(ws.Bp - ws.Fp) < 1e-14);
    CHECK(max_abs(ws.C - ws.G) < 1e-14);
  }

  TEST_CASE("workspace denominators match the stationary equations") {
    std::mt19937_64 rng(1);
    for (int rep = 0; rep < 20; ++rep) {
      const auto c = oracle::random_case(2 + static_cast<std::size_t>(rep % 6), rng);
      const auto in = inputs_of(c.sample);
      const auto s = solve_fixed_point(c.model, in);
      const auto ws = build_workspace(c.model, in, s);
      CHECK(ws.D.minCoeff() > 0.0);
      CHECK(ws.d.minCoeff() > 0.0);
      const auto n = static_cast<Eigen::Index>(c.model.size());
      const double W = c.model.total_rate();
      for (Eigen::Index i = 0; i < n; ++i) {
        double D = in.safe(i) + static_cast<double>(n - 1) * W;
        double d = in.compromised(i) + static_cast<double>(n - 1) * W;
        for (Eigen::Index j = 0; j < n; ++j) {
          if (j == i) continue;
          D += (W - c.model.wy_plus()(j, i)) * s.q(j);
          d += (W - c.model.wx_plus()(j, i)) * s.Q(j);
        }
        CHECK(ws.D(i) == doctest::Approx(D).epsilon(1e-13));
        CHECK(ws.d(i) == doctest::Approx(d).epsilon(1e-13));
      }
      CHECK(ws.C.diagonal().cwiseAbs().maxCoeff() == 0.0);
      CHECK(ws.G.diagonal().cwiseAbs().maxCoeff() == 0.0);
      CHECK(max_abs(ws.Bsp - ws.Fp) == 0.0);
      CHECK(max_abs(ws.Gs - ws.C) == 0.0);
    }
  }

  TEST_CASE("workspace inverses multiply back to identity") {
    std::mt19937_64 rng(42);
    for (int rep = 0; rep < 10; ++rep) {
      const auto c = oracle::random_case(5, rng);
      const auto in = inputs_of(c.sample);
      const auto s = solve_fixed_point(c.model, in);
      const auto ws = build_workspace(c.model, in, s);
      const Matrix I = Matrix::Identity(5, 5);
      CHECK(((I - ws.Fp) * ws.minv_f - I).cwiseAbs().rowwise().sum().maxCoeff() < 1e-8);
      CHECK(((I - ws.Fsp) * ws.minv_fs - I).cwiseAbs().rowwise().sum().maxCoeff() < 1e-8);
      CHECK(((I - ws.Bp - ws.G * ws.minv_f * ws.C) * ws.minv_main - I).cwiseAbs().rowwise().sum().maxCoeff() < 1e-8);
      CHECK(((I - ws.Bsp - ws.Gs * ws.minv_fs * ws.Cs) * ws.minv_main_star - I)
                .cwiseAbs()
                .rowwise()
                .sum()
                .maxCoeff() < 1e-8);
    }
  }

  TEST_CASE("state derivatives match finite differences") {
    std::mt19937_64 rng(7);
    for (int rep = 0; rep < 5; ++rep) {
      const auto c = oracle::random_case(4, rng);
      const auto in = inputs_of(c.sample);
      const auto s = solve_fixed_point(c.model, in);
      const auto ws = build_workspace(c.model, in, s);
      for (std::size_t u = 0; u < 4; ++u) {
        for (std::size_t v = 0; v < 4; ++v) {
          if (u == v) continue;
          const auto der = state_derivatives(ws, s, u, v);
          const auto [fQx, fqx] = oracle::fd_states(c.model, in, u, v, 0);
          const auto [fQy, fqy] = oracle::fd_states(c.model, in, u, v, 1);
          CAPTURE(u);
          CAPTURE(v);
          CHECK((der.dQ_dWx - fQx).cwiseAbs().maxCoeff() < 1e-4);
          CHECK((der.dq_dWx - fqx).cwiseAbs().maxCoeff() < 1e-4);
          CHECK((der.dQ_dWy - fQy).cwiseAbs().maxCoeff() < 1e-4);
          CHECK((der.dq_dWy - fqy).cwiseAbs().maxCoeff() < 1e-4);
        }
      }
    }
  }

  TEST_CASE("nearly inhibitory couplings keep derivatives exact") {
    // Every coupling has W+ + W- = W, so a node cannot be cut off; tiny
    // excitatory weights leave node 2 almost purely inhibited instead. They
    // stay off zero so the central differences remain inside the box.
    Matrix wx{{0.0, 0.6, 1e-3}, {0.4, 0.0, 1e-3}, {1e-3, 1e-3, 0.0}};
    Matrix wy{{0.0, 0.3, 1e-3}, {0.7, 0.0, 1e-3}, {1e-3, 1e-3, 0.0}};
    const ArnnModel m(1.0, wx, wy);
    Vector a(3);
    a << 0.3, 0.6, 0.2;
    const auto in = ExternalInputs::from_attack_ratio(a);
    const auto s = solve_fixed_point(m, in);
    const auto ws = build_workspace(m, in, s);
    for (std::size_t u = 0; u < 3; ++u) {
      for (std::size_t v = 0; v < 3; ++v) {
        if (u == v) continue;
        const auto der = state_derivatives(ws, s, u, v);
        const auto [fQ, fq] = oracle::fd_states(m, in, u, v, 0);
        const auto [gQ, gq] = oracle::fd_states(m, in, u, v, 1);
        CHECK((der.dQ_dWx - fQ).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((der.dq_dWx - fq).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((der.dQ_dWy - gQ).cwiseAbs().maxCoeff() < 1e-4);
        CHECK((der.dq_dWy - gq).cwiseAbs().maxCoeff() < 1e-4);
      }
    }
  }

  TEST_CASE("neutral starred and unstarred derivatives coincide") {
    const auto m = ArnnModel::neutral(4);
    const auto in = ExternalInputs::neutral(4, 1.0);
    const auto s = solve_fixed_point(m, in);
    const auto ws = build_workspace(m, in, s);
    for (std::size_t u = 0; u < 4; ++u) {
      for (std::size_t v = 0; v < 4; ++v) {
        if (u == v) continue;
        const auto der = state_derivatives(ws, s, u, v);
        CHECK((der.dQ_dWx - der.dq_dWy).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((der.dq_dWx - der.dQ_dWy).cwiseAbs().maxCoeff() < 1e-12);
      }
    }
  }

  TEST_CASE("cost examples") {
    StateProbabilities neutral{Vector::Constant(3, 0.5), Vector::Constant(3, 0.5)};
    CHECK(sample_cost(neutral, Vector::Constant(3, 0.5)) == 0.0);
    CHECK(sample_cost(neutral, Vector::Ones(3)) == doctest::Approx(0.5 * 3 * (0.25 + 0.25)));

    std::mt19937_64 rng(3);
    const auto c = oracle::random_case(4, rng);
    std::vector<TrainingSample> batch;
    for (int i = 0; i < 5; ++i) batch.push_back(oracle::random_case(4, rng).sample);
    const double forward = cost(c.model, batch);
    std::reverse(batch.begin(), batch.end());
    std::swap(batch[0], batch[2]);
    CHECK(cost(c.model, batch) == doctest::Approx(forward).epsilon(1e-14));
    double reference = 0.0;
    for (const auto& smp : batch) reference += oracle::raw_cost(c.model, smp);
    CHECK(forward == doctest::Approx(reference).epsilon(1e-8));
  }

  TEST_CASE("cost is zero when the fixed point hits the targets") {
    // With W = 2/3 and n = 2 the neutral inputs are 0.75 W (n - 1) = 0.5,
    // which is exactly Lambda = A, lambda = 1 - A at A = 0.5.
    const auto m = ArnnModel::neutral(2, 2.0 / 3.0);
    TrainingSample smp{Vector::Constant(2, 0.5), Vector::Constant(2, 0.5), 1};
    const auto s = solve_fixed_point(m, inputs_of(smp));
    CHECK((s.Q.array() - 0.5).abs().maxCoeff() < 1e-10);
    CHECK(cost(m, {smp}) < 1e-20);
    const auto g = cost_gradient(m, smp);
    CHECK(max_abs(g.dE_dWx) < 1e-9);
    CHECK(max_abs(g.dE_dWy) < 1e-9);
  }

  TEST_CASE("gradient matches finite differences") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 20; ++rep) {
      const auto c = oracle::random_case(4, rng);
      const auto g = cost_gradient(c.model, c.sample);
      const auto f = oracle::fd_cost_gradient(c.model, c.sample);
      for (Eigen::Index i = 0; i < 4; ++i) {
        for (Eigen::Index j = 0; j < 4; ++j) {
          const double tx = std::max(1e-5, 1e-3 * std::abs(f.dE_dWx(i, j)));
          const double ty = std::max(1e-5, 1e-3 * std::abs(f.dE_dWy(i, j)));
          CHECK(std::abs(g.dE_dWx(i, j) - f.dE_dWx(i, j)) <= tx);
          CHECK(std::abs(g.dE_dWy(i, j) - f.dE_dWy(i, j)) <= ty);
        }
      }
      CHECK(g.dE_dWx.diagonal().cwiseAbs().maxCoeff() == 0.0);
      CHECK(g.dE_dWy.diagonal().cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("gradient vanishes at a zero-cost point") {
    const auto m = ArnnModel::neutral(5);
    const auto in = ExternalInputs::neutral(5, 1.0);
    const auto s = solve_fixed_point(m, in);
    const auto ws = build_workspace(m, in, s);
    const auto g = cost_gradient_at(s, ws, s.Q);
    CHECK(max_abs(g.dE_dWx) < 1e-14);
    CHECK(max_abs(g.dE_dWy) < 1e-14);
  }

  TEST_CASE("gradient is linear in the residuals") {
    // At Q = q = 1/2 the target K' = 2K - 1/2 doubles both residuals.
    const auto m = ArnnModel::neutral(2, 2.0 / 3.0);
    const Vector a = Vector::Constant(2, 0.5);
    const auto in = ExternalInputs::from_attack_ratio(a);
    const auto s = solve_fixed_point(m, in);
    const auto ws = build_workspace(m, in, s);
    Vector k(2);
    k << 0.3, 0.65;
    const auto g1 = cost_gradient_at(s, ws, k);
    const auto g2 = cost_gradient_at(s, ws, 2.0 * k - s.Q);
    CHECK(max_abs(g1.dE_dWx) > 1e-3);
    CHECK(max_abs(g2.dE_dWx - 2.0 * g1.dE_dWx) < 1e-12);
    CHECK(max_abs(g2.dE_dWy - 2.0 * g1.dE_dWy) < 1e-12);

    // In general the gradient is affine in the targets.
    std::mt19937_64 rng(12);
    const auto c = oracle::random_case(5, rng);
    const auto in5 = inputs_of(c.sample);
    const auto s5 = solve_fixed_point(c.model, in5);
    const auto ws5 = build_workspace(c.model, in5, s5);
    const Vector k5 = c.sample.compromised_ratio;
    const Vector delta = Vector::LinSpaced(5, -0.2, 0.3);
    const auto b0 = cost_gradient_at(s5, ws5, k5);
    const auto b1 = cost_gradient_at(s5, ws5, k5 + delta);
    const auto b2 = cost_gradient_at(s5, ws5, k5 + 2.0 * delta);
    CHECK(max_abs((b2.dE_dWx - b0.dE_dWx) - 2.0 * (b1.dE_dWx - b0.dE_dWx)) < 1e-12);
    CHECK(max_abs((b2.dE_dWy - b0.dE_dWy) - 2.0 * (b1.dE_dWy - b0.dE_dWy)) < 1e-12);
  }

  TEST_CASE("shared inverses equal a fresh linear solve per weight") {
    std::mt19937_64 rng(77);
    for (int rep = 0; rep < 10; ++rep) {
      const auto c = oracle::random_case(4, rng);
      const auto g = cost_gradient(c.model, c.sample);
      const auto ref = oracle::linear_system_gradient(c.model, c.sample);
      CHECK(max_abs(g.dE_dWx - ref.dE_dWx) < 1e-10);
      CHECK(max_abs(g.dE_dWy - ref.dE_dWy) < 1e-10);
    }
  }

  TEST_CASE("sgd step with zero rate leaves the model unchanged") {
    std::mt19937_64 rng(4);
    const auto c = oracle::random_case(4, rng);
    CHECK(sgd_step(c.model, c.sample, 0.0) == c.model);
  }

  TEST_CASE("sgd step descends when targets equal the attack ratios") {
    std::mt19937_64 rng(31);
    for (int rep = 0; rep < 20; ++rep) {
      const auto m = ArnnModel::neutral(4);
      auto smp = oracle::random_case(4, rng).sample;
      smp.compromised_ratio = smp.attack_ratio;
      const double before = cost(m, {smp});
      const double after = cost(sgd_step(m, smp, 0.01), {smp});
      CAPTURE(rep);
      CHECK(after < before);
    }
  }

  TEST_CASE("sgd step follows the negative gradient inside the box") {
    std::mt19937_64 rng(13);
    const auto c = oracle::random_case(4, rng);
    const double eta = 0.05;
    const auto g = cost_gradient(c.model, c.sample);
    const auto next = sgd_step(c.model, c.sample, eta);
    const Matrix expect_x = (c.model.wx_plus() - eta * g.dE_dWx).cwiseMax(0.0).cwiseMin(1.0);
    const Matrix expect_y = (c.model.wy_plus() - eta * g.dE_dWy).cwiseMax(0.0).cwiseMin(1.0);
    CHECK(max_abs(next.wx_plus() - expect_x) == 0.0);
    CHECK(max_abs(next.wy_plus() - expect_y) == 0.0);
    CHECK(next.total_rate() == c.model.total_rate());
  }

  TEST_CASE("weights pushed below zero clamp to exactly zero") {
    std::mt19937_64 rng(21);
    const auto c = oracle::random_case(4, rng);
    const auto g = cost_gradient(c.model, c.sample);
    const auto next = sgd_step(c.model, c.sample, 1e6);
    bool seen = false;
    for (Eigen::Index i = 0; i < 4; ++i) {
      for (Eigen::Index j = 0; j < 4; ++j) {
        if (g.dE_dWx(i, j) > 0.0) {
          CHECK(next.wx_plus()(i, j) == 0.0);
          seen = true;
        }
        if (g.dE_dWx(i, j) < 0.0) CHECK(next.wx_plus()(i, j) == 1.0);
      }
    }
    CHECK(seen);
    check_box(next);
  }

  TEST_CASE("weight box holds over many steps") {
    std::mt19937_64 rng(55);
    auto m = oracle::random_case(6, rng).model;
    for (int step = 0; step < 50; ++step) {
      const auto smp = oracle::random_case(6, rng).sample;
      m = sgd_step(m, smp, 0.5);
    }
    check_box(m);
  }

  TEST_CASE("offline training runs every sample every epoch") {
    const auto train = separable_stream(6, 25, 1);
    TrainConfig cfg;
    const auto r = train_offline(ArnnModel::neutral(6), train, cfg);
    REQUIRE(r.trace.size() == 20);
    CHECK(r.trace.front().epoch == 1);
    CHECK(r.trace.back().epoch == 20);
    std::size_t skipped = 0;
    for (const auto& e : r.trace) skipped += e.skipped;
    CHECK(skipped == 0);
    CHECK(r.trace.back().cost < cost(ArnnModel::neutral(6), train));
    check_box(r.model);

    // 25 samples x 20 epochs equals 500 explicit steps.
    auto manual = ArnnModel::neutral(6);
    for (int e = 0; e < 20; ++e)
      for (const auto& smp : train) manual = sgd_step(manual, smp, cfg.eta);
    CHECK(manual == r.model);
  }

  TEST_CASE("one epoch on one sample equals one sgd step") {
    std::mt19937_64 rng(6);
    const auto c = oracle::random_case(4, rng);
    TrainConfig cfg;
    cfg.epochs = 1;
    cfg.eta = 0.1;
    const auto r = train_offline(c.model, {c.sample}, cfg);
    CHECK(r.model == sgd_step(c.model, c.sample, 0.1));
    REQUIRE(r.trace.size() == 1);
    CHECK(r.trace[0].cost == doctest::Approx(cost(r.model, {c.sample})).epsilon(1e-14));
  }

  TEST_CASE("small-step training cost is non-increasing on a separable stream") {
    const auto train = separable_stream(6, 25, 1);
    TrainConfig cfg;
    cfg.eta = 0.01;
    const auto r = train_offline(ArnnModel::neutral(6), train, cfg);
    for (std::size_t e = 1; e < r.trace.size(); ++e) {
      CAPTURE(e);
      CHECK(r.trace[e].cost <= r.trace[e - 1].cost);
    }
  }

  TEST_CASE("offline training is bitwise deterministic") {
    const auto train = separable_stream(5, 12, 9);
    TrainConfig cfg;
    cfg.epochs = 5;
    const auto a = train_offline(ArnnModel::neutral(5), train, cfg);
    const auto b = train_offline(ArnnModel::neutral(5), train, cfg);
    REQUIRE(a.trace.size() == b.trace.size());
    for (std::size_t i = 0; i < a.trace.size(); ++i) CHECK(a.trace[i].cost == b.trace[i].cost);
    CHECK(a.model == b.model);
  }

  TEST_CASE("offline training rejects bad configuration") {
    TrainConfig cfg;
    CHECK_THROWS_AS(train_offline(ArnnModel::neutral(3), {}, cfg), InvalidSizeError);
    const auto train = separable_stream(3, 2, 1);
    cfg.epochs = 0;
    CHECK_THROWS_AS(train_offline(ArnnModel::neutral(3), train, cfg), InvalidParameterError);
    cfg.epochs = 1;
    cfg.eta = -0.1;
    CHECK_THROWS_AS(train_offline(ArnnModel::neutral(3), train, cfg), InvalidParameterError);
  }

  TEST_CASE("online training fires at multiples of the window") {
    const auto stream = separable_stream(4, 12, 2);
    OnlineConfig cfg;
    const auto r = train_online(ArnnModel::neutral(4), stream, cfg);
    CHECK(r.training_slots == std::vector<long>{6, 12});
    CHECK(r.decisions.size() == 12);
    for (std::size_t i = 0; i < r.decisions.size(); ++i) CHECK(r.decisions[i].slot == static_cast<long>(i + 1));
  }

  TEST_CASE("online training trains on the last window for the given epochs") {
    const auto stream = separable_stream(4, 12, 2);
    OnlineConfig cfg;
    const auto r = train_online(ArnnModel::neutral(4), stream, cfg);
    auto manual = ArnnModel::neutral(4);
    for (std::size_t end : {6u, 12u}) {
      for (int e = 0; e < cfg.epochs; ++e)
        for (std::size_t i = end - 6; i < end; ++i) manual = sgd_step(manual, stream[i], cfg.eta);
    }
    CHECK(r.model == manual);
  }

  TEST_CASE("online predictions never see the current or later slots") {
    const auto stream = separable_stream(4, 18, 3);
    OnlineConfig cfg;
    std::vector<std::pair<long, bool>> calls;
    std::vector<ArnnModel> seen_at_predict;
    const auto r = train_online(ArnnModel::neutral(4), stream, cfg, [&](long slot, bool trained, const ArnnModel& m) {
      calls.emplace_back(slot, trained);
      if (!trained) seen_at_predict.push_back(m);
    });
    REQUIRE(calls.size() == 18 + 3);
    std::size_t k = 0;
    for (long l = 1; l <= 18; ++l) {
      CHECK(calls[k] == std::make_pair(l, false));
      ++k;
      if (l % 6 == 0) {
        CHECK(calls[k] == std::make_pair(l, true));
        ++k;
      }
    }
    // Slot l is classified with the model trained through slot l - 1 only.
    auto manual = ArnnModel::neutral(4);
    for (long l = 1; l <= 18; ++l) {
      CHECK(seen_at_predict[static_cast<std::size_t>(l - 1)] == manual);
      const auto& smp = stream[static_cast<std::size_t>(l - 1)];
      const auto expect = classify(solve_fixed_point(manual, ExternalInputs::from_attack_ratio(smp.attack_ratio)), 0.98);
      CHECK(r.decisions[static_cast<std::size_t>(l - 1)].decision.compromised == expect.compromised);
      if (l % 6 == 0) {
        for (int e = 0; e < cfg.epochs; ++e)
          for (long i = l - 6; i < l; ++i) manual = sgd_step(manual, stream[static_cast<std::size_t>(i)], cfg.eta);
      }
    }
  }

  TEST_CASE("online with zero epochs is pure inference") {
    const auto stream = separable_stream(5, 13, 4);
    OnlineConfig cfg;
    cfg.epochs = 0;
    std::mt19937_64 rng(1);
    const auto start = oracle::random_case(5, rng).model;
    const auto r = train_online(start, stream, cfg);
    CHECK(r.model == start);
    for (std::size_t i = 0; i < stream.size(); ++i) {
      const auto s = solve_fixed_point(start, ExternalInputs::from_attack_ratio(stream[i].attack_ratio));
      const auto d = classify(s, cfg.gamma);
      CHECK(r.decisions[i].decision.compromised == d.compromised);
      CHECK((r.decisions[i].decision.ratio - d.ratio).cwiseAbs().maxCoeff() == 0.0);
    }
  }

  TEST_CASE("online window of one trains every slot") {
    const auto stream = separable_stream(3, 4, 5);
    OnlineConfig cfg;
    cfg.window = 1;
    cfg.epochs = 1;
    const auto r = train_online(ArnnModel::neutral(3), stream, cfg);
    CHECK(r.training_slots == std::vector<long>{1, 2, 3, 4});
    cfg.window = 0;
    CHECK_THROWS_AS(train_online(ArnnModel::neutral(3), stream, cfg), InvalidParameterError);
  }
}
