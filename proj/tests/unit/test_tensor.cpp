#include <random>

#include "criteria.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "smq/ops.hpp"

using smq::Tensor;
using Td = Tensor<double>;

TEST_CASE("tensor construction checks the shape") {
  CHECK_THROWS_AS(Td({2, 3}, std::vector<double>(5)), smq::ShapeError);
  const Td t = Td::zeros({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  CHECK(Td::scalar(2.5).item() == 2.5);
  CHECK_THROWS_AS(t.item(), smq::ShapeError);
}

TEST_CASE("backward requires a scalar loss that depends on a parameter") {
  const Td a({3}, {1, 2, 3}, true);
  CHECK_THROWS_AS(smq::backward(a), smq::ShapeError);
  CHECK_THROWS_AS(smq::backward(smq::sum_all(Td({3}, {1, 2, 3}))), smq::InvalidArgument);
}

TEST_CASE("ops without gradient inputs record nothing") {
  const Td a({2}, {1, 2}), b({2}, {3, 4});
  const Td c = smq::add(a, b);
  CHECK_FALSE(c.requires_grad());
  CHECK(c.node()->parents.empty());
}

TEST_CASE("gradients accumulate over every use of a tensor") {
  const Td x({2}, {1.5, -2.0}, true);
  // f = sum(x*x + 3x) -> df/dx = 2x + 3
  smq::backward(smq::sum_all(smq::add(smq::mul(x, x), smq::scale(x, 3.0))));
  CHECK(x.grad()[0] == doctest::Approx(6.0));
  CHECK(x.grad()[1] == doctest::Approx(-1.0));
}

TEST_CASE("forward values of shape ops") {
  const Td a({2, 3}, {0, 1, 2, 3, 4, 5});
  const Td p = smq::permute(a, {1, 0});
  CHECK(p.shape() == smq::Shape{3, 2});
  CHECK(std::vector<double>(p.data().begin(), p.data().end()) == std::vector<double>{0, 3, 1, 4, 2, 5});
  const Td s = smq::sum(a, {1});
  CHECK(s.data()[0] == 3.0);
  CHECK(s.data()[1] == 12.0);
  const Td sl = smq::slice(a, 1, 1, 3);
  CHECK(std::vector<double>(sl.data().begin(), sl.data().end()) == std::vector<double>{1, 2, 4, 5});
  const Td pe = smq::pad_end(a, 1, 2);
  CHECK(pe.shape() == smq::Shape{2, 5});
  CHECK(pe.data()[3] == 0.0);
  const Td r = smq::repeat(Td({2, 1}, {7, 8}), 1, 3);
  CHECK(std::vector<double>(r.data().begin(), r.data().end()) == std::vector<double>{7, 7, 7, 8, 8, 8});
  const Td is = smq::index_select(a, 1, {2, 0});
  CHECK(std::vector<double>(is.data().begin(), is.data().end()) == std::vector<double>{2, 0, 5, 3});
  CHECK_THROWS_AS(smq::reshape(a, {4}), smq::ShapeError);
  CHECK_THROWS_AS(smq::add(a, Td::zeros({3, 2})), smq::ShapeError);
}

TEST_CASE("conv1d matches a direct sum with zero padding") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1, 1);
  const std::size_t B = 2, Ci = 3, Co = 2, L = 7, K = 3, dil = 2;
  std::vector<double> x(B * Ci * L), w(Co * Ci * K), b(Co);
  for (auto* v : {&x, &w, &b}) {
    for (auto& e : *v) e = u(rng);
  }
  const Td y = smq::conv1d(Td({B, Ci, L}, x), Td({Co, Ci, K}, w), Td({Co}, b), dil);
  for (std::size_t n = 0; n < B; ++n) {
    for (std::size_t o = 0; o < Co; ++o) {
      for (std::size_t t = 0; t < L; ++t) {
        double ref = b[o];
        for (std::size_t i = 0; i < Ci; ++i) {
          for (std::size_t j = 0; j < K; ++j) {
            const long src = static_cast<long>(t) + (static_cast<long>(j) - 1) * static_cast<long>(dil);
            if (src >= 0 && src < static_cast<long>(L)) ref += w[(o * Ci + i) * K + j] * x[(n * Ci + i) * L + src];
          }
        }
        CHECK(y.data()[(n * Co + o) * L + t] == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
  CHECK_THROWS_AS(smq::conv1d(Td::zeros({1, 2, 4}), Td::zeros({1, 3, 3}), Td::zeros({1})), smq::ShapeError);
  CHECK_THROWS_AS(smq::conv1d(Td::zeros({1, 2, 4}), Td::zeros({1, 2, 2}), Td::zeros({1})), smq::ShapeError);
}

TEST_CASE("sqrt gradient is finite at zero") {
  const Td x({2}, {0.0, 4.0}, true);
  smq::backward(smq::sum_all(smq::sqrt(x)));
  CHECK(std::isfinite(x.grad()[0]));
  CHECK(x.grad()[1] == doctest::Approx(0.25));
}

TEST_CASE("straight-through: forward is q, gradient to p is the upstream gradient") {
  const Td p({4}, {0.1, 0.2, 0.3, 0.4}, true);
  const Td q({4}, {1, 2, 3, 4}, true);
  const Td out = smq::straight_through(p, q);
  CHECK(std::vector<double>(out.data().begin(), out.data().end()) == std::vector<double>{1, 2, 3, 4});
  smq::backward(smq::sum_all(out));
  for (double g : p.grad()) CHECK(g == 1.0);
  CHECK_FALSE(q.has_grad());
}

TEST_CASE("every differentiable op and the full graph pass the gradient oracle") {
  const auto outcome = acceptance::gradient_oracle();
  INFO(outcome.detail);
  CHECK(outcome.pass);
}
