#include <cmath>
#include <random>

#include "criteria.hpp"
#include "doctest.h"
#include "oracles.hpp"
#include "smq/quantizer.hpp"

using namespace smq;
using Tf = Tensor<float>;

TEST_CASE("patchify pads the tail and depatchify inverts it") {
  std::vector<float> v(2 * 10 * 3);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  const Tf z({2, 10, 3}, v);
  const auto p = patchify(z, 4);
  CHECK(p.patches.shape() == Shape{2, 3, 4, 3});
  CHECK(p.pad == 2);
  CHECK(p.patches.data()[(0 * 12 + 10) * 3] == 0.0f);
  const Tf back = depatchify(p.patches, 10);
  CHECK(std::vector<float>(back.data().begin(), back.data().end()) == v);
  const auto exact = patchify(Tf({1, 8, 1}, std::vector<float>(8, 1.0f)), 4);
  CHECK(exact.patches.dim(1) == 2);
  CHECK(exact.pad == 0);
  CHECK_THROWS_AS(patchify(z, 0), InvalidArgument);
}

TEST_CASE("patch validity drops all-padding patches") {
  CHECK(patch_validity({10, 3}, 3, 4) == std::vector<std::uint8_t>{1, 1, 1, 1, 0, 0});
}

TEST_CASE("quantize: nearest word, ties to the lowest index") {
  Codebook<float> cb(2, 1, 2);
  const std::vector<float> words{0, 0, 1, 1};
  std::copy(words.begin(), words.end(), cb.values().begin());
  const auto q = quantize(Tf({1, 2, 1, 2}, {0.2f, 0.1f, 0.5f, 0.5f}), cb, {1, 1});
  CHECK(q.assignment.index == std::vector<int>{0, 0});
  CHECK(std::vector<float>(q.values.data().begin(), q.values.data().end()) == std::vector<float>{0, 0, 0, 0});
  CHECK(q.assignment.sq_distance[0] == doctest::Approx(0.05));
  const auto far = quantize(Tf({1, 1, 1, 2}, {0.9f, 0.8f}), cb, {1});
  CHECK(far.assignment.index[0] == 1);
}

TEST_CASE("quantize leaves invalid patches alone and never needs gradients") {
  Codebook<float> cb(1, 1, 1);
  cb.values()[0] = 5.0f;
  const Tf p({1, 2, 1, 1}, {1.0f, 2.0f}, true);
  const auto q = quantize(p, cb, {1, 0});
  CHECK(q.assignment.index == std::vector<int>{0, -1});
  CHECK(q.values.data()[1] == 2.0f);
  CHECK_FALSE(q.values.requires_grad());
  CHECK_THROWS_AS(quantize(p, cb, {1}), ShapeError);
}

TEST_CASE("quantize matches exhaustive search on random instances") {
  std::mt19937_64 rng(2);
  std::normal_distribution<float> g;
  Codebook<float> cb(5, 2, 3);
  for (auto& v : cb.values()) v = g(rng);
  std::vector<float> data(40 * 6);
  for (auto& v : data) v = g(rng);
  const auto q = quantize(Tf({1, 40, 2, 3}, data), cb, std::vector<std::uint8_t>(40, 1));
  std::vector<std::vector<float>> centers;
  for (std::size_t k = 0; k < 5; ++k) centers.emplace_back(cb.word(k).begin(), cb.word(k).end());
  for (std::size_t i = 0; i < 40; ++i) {
    const std::vector<float> point(data.begin() + i * 6, data.begin() + (i + 1) * 6);
    CHECK(q.assignment.index[i] == static_cast<int>(oracle::nearest(point, centers)));
  }
  acceptance::Budget small;
  small.quantize_instances = 200;
  const auto outcome = acceptance::quantizer_oracle(small);
  INFO(outcome.detail);
  CHECK(outcome.pass);
}

TEST_CASE("EMA update") {
  Codebook<float> cb(2, 1, 1);
  cb.values()[0] = 0.0f;
  cb.values()[1] = 3.0f;
  PatchAssignment a;
  a.batch = 1;
  a.patches = 2;
  a.index = {0, 0};
  a.sq_distance = {0, 0};
  a.valid = {1, 1};
  const std::vector<float> patches{0.5f, 1.5f};
  auto half = cb;
  CHECK(ema_update<float>(half, patches, a, 0.5) == std::vector<std::size_t>{2, 0});
  CHECK(half.values()[0] == 0.5f);
  CHECK(half.values()[1] == 3.0f);
  auto keep = cb;
  ema_update<float>(keep, patches, a, 1.0);
  CHECK(keep == cb);
  auto take = cb;
  ema_update<float>(take, patches, a, 0.0);
  CHECK(take.values()[0] == 1.0f);
  CHECK_THROWS_AS(ema_update<float>(take, patches, a, 1.5), InvalidArgument);
  CHECK_THROWS_AS(ema_update<float>(take, std::vector<float>{1.0f}, a, 0.5), ShapeError);
}

TEST_CASE("segmentation repeats each word over its patch") {
  PatchAssignment a;
  a.batch = 1;
  a.patches = 3;
  a.index = {2, 0, 1};
  a.valid = {1, 1, 1};
  CHECK(segmentation_from_assignment(a, 4, {10})[0] == std::vector<int>{2, 2, 2, 2, 0, 0, 0, 0, 1, 1});
  PatchAssignment f;
  f.batch = 1;
  f.patches = 4;
  f.index = {3, 1, 1, 0};
  f.valid = {1, 1, 1, 1};
  CHECK(segmentation_from_assignment(f, 1, {4})[0] == f.index);
  CHECK_THROWS_AS(segmentation_from_assignment(a, 4, {13}), ShapeError);
}

TEST_CASE("k-means") {
  // Two tight, far-apart clouds.
  std::vector<float> rows;
  std::mt19937_64 rng(4);
  std::normal_distribution<float> g(0.0f, 0.1f);
  for (int i = 0; i < 20; ++i) {
    rows.push_back(g(rng));
    rows.push_back(g(rng));
  }
  for (int i = 0; i < 20; ++i) {
    rows.push_back(10.0f + g(rng));
    rows.push_back(10.0f + g(rng));
  }
  const auto km = kmeans<float>(rows, 2, 2, 1);
  const bool first_low = km.centroids[0] < 5.0f;
  CHECK((first_low ? km.centroids[2] : km.centroids[0]) > 5.0f);
  for (std::size_t i = 0; i < 40; ++i) CHECK(km.labels[i] == km.labels[i < 20 ? 0 : 20]);
  CHECK(km.labels[0] != km.labels[20]);

  const auto one = kmeans<float>(rows, 2, 1, 1);
  double mx = 0.0;
  for (std::size_t i = 0; i < 40; ++i) mx += rows[2 * i];
  CHECK(one.centroids[0] == doctest::Approx(mx / 40.0).epsilon(1e-5));

  CHECK(kmeans_init<float>(rows, 2, 1, 2, 9).values()[0] == kmeans_init<float>(rows, 2, 1, 2, 9).values()[0]);
  CHECK_THROWS_AS(kmeans<float>(rows, 2, 41, 1), InvalidArgument);
  CHECK_THROWS_AS(kmeans<float>(rows, 3, 2, 1), ShapeError);
  const auto best = kmeans_best_of<float>(rows, 2, 3, 5, 4);
  std::mt19937_64 seeds(5);
  for (int r = 0; r < 4; ++r) CHECK(best.inertia <= kmeans<float>(rows, 2, 3, seeds()).inertia);
}

TEST_CASE("random codebook init is seeded and bounded") {
  const auto a = Codebook<float>::kaiming(4, 5, 6, 3), b = Codebook<float>::kaiming(4, 5, 6, 3);
  CHECK(a == b);
  const float bound = std::sqrt(6.0f / 30.0f);
  for (float v : a.values()) CHECK(std::abs(v) <= bound);
  CHECK_THROWS_AS(Codebook<float>(0, 1, 1), InvalidArgument);
}
