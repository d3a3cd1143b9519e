#include "criteria.hpp"
#include "doctest.h"
#include "smq/losses.hpp"

using namespace smq;
using Td = Tensor<double>;

namespace {

// [N=1, C=3, T=1, V=2] from two joint positions.
Td two_joints(double ax, double ay, double az, double bx, double by, double bz) {
  return Td({1, 3, 1, 2}, {ax, bx, ay, by, az, bz});
}

const std::vector<std::size_t> kPos{0, 1, 2};

}  // namespace

TEST_CASE("inter-joint distance loss") {
  const Td mask = Td::full({1, 1}, 1.0);
  const Td x = two_joints(0, 0, 0, 1, 0, 0);
  const Td xh = two_joints(0, 0, 0, 3, 0, 0);
  CHECK(inter_joint_mse(x, x, mask, kPos).item() == 0.0);
  CHECK(inter_joint_mse(x, xh, mask, kPos).item() == doctest::Approx(2.0));
}

TEST_CASE("root distance loss") {
  const Td mask = Td::full({1, 1}, 1.0);
  const Td x = two_joints(0, 0, 0, 1, 0, 0);
  const Td xh = two_joints(0, 0, 0, 3, 0, 0);
  CHECK(root_distance_mse(x, x, mask, 0, kPos).item() == 0.0);
  CHECK(root_distance_mse(x, xh, mask, 0, kPos).item() == doctest::Approx(2.0));
  CHECK_THROWS_AS(root_distance_mse(x, xh, mask, 2, kPos), InvalidArgument);
}

TEST_CASE("plain MSE") {
  const Td mask = Td::full({1, 4}, 1.0);
  const Td zero = Td::zeros({1, 2, 4, 3}), one = Td::full({1, 2, 4, 3}, 1.0);
  CHECK(plain_mse(zero, zero, mask).item() == 0.0);
  CHECK(plain_mse(zero, one, mask).item() == 1.0);
  // masked frames do not count
  const Td half({1, 4}, {1, 1, 0, 0});
  std::vector<double> v(24, 1.0);
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 2; t < 4; ++t) {
      for (std::size_t j = 0; j < 3; ++j) v[(c * 4 + t) * 3 + j] = 50.0;
    }
  }
  CHECK(plain_mse(zero, Td({1, 2, 4, 3}, v), half).item() == 1.0);
  CHECK_THROWS_AS(plain_mse(zero, one, Td::zeros({1, 4})), InvalidArgument);
  CHECK_THROWS_AS(plain_mse(zero, Td::zeros({1, 2, 4, 2}), mask), ShapeError);
}

TEST_CASE("position channels are validated") {
  const Td x = Td::zeros({1, 2, 1, 2});
  const Td mask = Td::full({1, 1}, 1.0);
  CHECK_THROWS_AS(inter_joint_mse(x, x, mask, {0, 1, 2}), InvalidArgument);
  CHECK_THROWS_AS(inter_joint_mse(x, x, mask, {}), InvalidArgument);
}

TEST_CASE("rigid-motion invariance of the distance losses") {
  acceptance::Budget small;
  small.rigid_transforms = 20;
  const auto outcome = acceptance::rigid_invariance(small);
  INFO(outcome.detail);
  CHECK(outcome.pass);
}

TEST_CASE("root centering cancels a translation of the reconstruction target") {
  // Translating X-hat does not change the distance losses.
  const Td mask = Td::full({1, 1}, 1.0);
  const Td x = two_joints(0.5, 1, 2, 1, -1, 0);
  const Td moved = two_joints(10.5, 6, -2, 11, 4, -4);
  CHECK(inter_joint_mse(x, moved, mask, kPos).item() == doctest::Approx(0.0));
  CHECK(root_distance_mse(x, moved, mask, 1, kPos).item() == doctest::Approx(0.0));
}

TEST_CASE("commitment loss") {
  const Td p({1, 1, 1, 1}, {1.0}, true);
  const Td q({1, 1, 1, 1}, {3.0}, true);
  CHECK(commitment(p, p, {1}).item() == 0.0);
  const Td l = commitment(p, q, {1});
  CHECK(l.item() == 4.0);
  backward(l);
  CHECK(p.grad()[0] == -4.0);
  CHECK_FALSE(q.has_grad());
  CHECK(commitment(p, q, {0}).item() == 0.0);
  CHECK_THROWS_AS(commitment(p, q, {1, 1}), ShapeError);
}

TEST_CASE("total loss") {
  CHECK(total_loss(Td::scalar(2.0), Td::scalar(1.0), 0.001).item() == doctest::Approx(1.002));
  CHECK(total_loss(Td::scalar(2.0), Td::scalar(1.0), 0.0).item() == 1.0);
  CHECK_THROWS_AS(total_loss(Td::scalar(2.0), Td::scalar(1.0), -1.0), InvalidArgument);
}

TEST_CASE("loss variants parse and dispatch") {
  CHECK(parse_reconstruction_loss("inter_joint") == ReconstructionLoss::inter_joint);
  CHECK(parse_reconstruction_loss(to_string(ReconstructionLoss::root_distance)) == ReconstructionLoss::root_distance);
  CHECK_THROWS_AS(parse_reconstruction_loss("l1"), InvalidArgument);
  LossConfig cfg;
  cfg.reconstruction = ReconstructionLoss::plain_mse;
  const Td mask = Td::full({1, 1}, 1.0);
  const Td x = two_joints(0, 0, 0, 1, 0, 0), xh = two_joints(0, 0, 0, 3, 0, 0);
  CHECK(reconstruction_loss(cfg, x, xh, mask).item() == doctest::Approx(4.0 / 6.0));
}
