#include <random>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "smq/model.hpp"

using namespace smq;
using Td = Tensor<double>;

namespace {

Td random_input(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1, 1);
  std::vector<double> v(numel(shape));
  for (auto& x : v) x = u(rng);
  return Td(std::move(shape), std::move(v));
}

void zero_biases(const Autoencoder<double>& ae) {
  for (auto& p : ae.named_parameters()) {
    if (p.name.ends_with(".bias")) {
      Td t = p.tensor;
      for (auto& x : t.mutable_data()) x = 0.0;
    }
  }
}

}  // namespace

TEST_CASE("encoder and decoder shapes") {
  const Autoencoder<float> ae(ModelConfig{}, 6, 3, 1);
  const Tensor<float> x = Tensor<float>::zeros({2, 6, 100, 3});
  const Tensor<float> mask = Tensor<float>::full({2, 100}, 1.0f);
  const Tensor<float> z = ae.encode(x, mask);
  CHECK(z.shape() == Shape{2, 100, 48});
  CHECK(ae.decode(z, mask).shape() == x.shape());
  CHECK_THROWS_AS(ae.encode(Tensor<float>::zeros({2, 5, 100, 3}), mask), ShapeError);
  CHECK_THROWS_AS(ae.decode(Tensor<float>::zeros({2, 100, 47}), mask), ShapeError);
  CHECK_THROWS_AS(ae.encode(x, Tensor<float>::full({2, 99}, 1.0f)), ShapeError);
}

TEST_CASE("shapes hold in every mode") {
  for (bool de : {true, false}) {
    for (bool dd : {true, false}) {
      ModelConfig cfg;
      cfg.hidden_dim = 8;
      cfg.latent_dim = 4;
      cfg.disentangled_encoder = de;
      cfg.disentangled_decoder = dd;
      const Autoencoder<double> ae(cfg, 3, 5, 2);
      const Td x = random_input({2, 3, 11, 5}, 3);
      const Td mask = Td::full({2, 11}, 1.0);
      const Td z = ae.encode(x, mask);
      CHECK(z.shape() == Shape{2, 11, 20});
      CHECK(ae.decode(z, mask).shape() == x.shape());
    }
  }
}

TEST_CASE("zero input and zero biases give zero latents and zero reconstructions") {
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  const Autoencoder<double> ae(cfg, 3, 4, 5);
  zero_biases(ae);
  const Td mask = Td::full({1, 9}, 1.0);
  const Td z = ae.encode(Td::zeros({1, 3, 9, 4}), mask);
  const Td y = ae.decode(Td::zeros({1, 9, 64}), mask);
  for (double v : z.data()) CHECK(v == 0.0);
  for (double v : y.data()) CHECK(v == 0.0);
}

TEST_CASE("disentangled encoder is equivariant to joint permutations") {
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  cfg.latent_dim = 3;
  const std::size_t C = 2, L = 10, V = 4, D = 3;
  const Autoencoder<double> ae(cfg, C, V, 6);
  const Td x = random_input({1, C, L, V}, 7);
  const Td mask = Td::full({1, L}, 1.0);
  const std::vector<std::size_t> perm{2, 0, 3, 1};
  const Td xp = index_select(x, 3, perm);
  const Td z = ae.encode(x, mask), zp = ae.encode(xp, mask);
  for (std::size_t t = 0; t < L; ++t) {
    for (std::size_t v = 0; v < V; ++v) {
      for (std::size_t d = 0; d < D; ++d) {
        CHECK(zp.data()[t * V * D + v * D + d] == z.data()[t * V * D + perm[v] * D + d]);
      }
    }
  }
}

TEST_CASE("disentangled parameter count does not depend on the number of joints") {
  const ModelConfig cfg;
  CHECK(Autoencoder<float>(cfg, 3, 4, 0).parameter_count() == Autoencoder<float>(cfg, 3, 22, 0).parameter_count());
  ModelConfig ent = cfg;
  ent.disentangled_encoder = false;
  CHECK(Autoencoder<float>(ent, 3, 4, 0).parameter_count() < Autoencoder<float>(ent, 3, 22, 0).parameter_count());
}

TEST_CASE("dilations double within each stage and names are unique") {
  ModelConfig cfg;
  cfg.stages = 3;
  cfg.layers_per_stage = 4;
  const Autoencoder<float> ae(cfg, 3, 2, 0);
  const auto params = ae.named_parameters();
  std::set<std::string> names;
  for (const auto& p : params) CHECK(names.insert(p.name).second);
  // 3 stages * (in + 4 * 2 + out) convs * (weight, bias) * (encoder, decoder)
  CHECK(params.size() == 3 * 10 * 2 * 2);
  CHECK(names.count("encoder.stage2.layer3.dilated.weight") == 1);
}

TEST_CASE("masked frames do not leak into valid frames") {
  ModelConfig cfg;
  cfg.hidden_dim = 8;
  const Autoencoder<double> ae(cfg, 2, 3, 9);
  Td x = random_input({1, 2, 12, 3}, 10);
  std::vector<double> m(12, 1.0);
  std::fill(m.begin() + 8, m.end(), 0.0);
  const Td mask({1, 12}, m);
  const Td z1 = ae.encode(x, mask);
  // Change the padded frames only.
  std::vector<double> changed(x.data().begin(), x.data().end());
  for (std::size_t c = 0; c < 2; ++c) {
    for (std::size_t t = 8; t < 12; ++t) {
      for (std::size_t v = 0; v < 3; ++v) changed[(c * 12 + t) * 3 + v] = 100.0;
    }
  }
  const Td z2 = ae.encode(Td({1, 2, 12, 3}, changed), mask);
  for (std::size_t i = 0; i < 8 * 3 * 16; ++i) CHECK(z1.data()[i] == doctest::Approx(z2.data()[i]).epsilon(1e-12));
}

TEST_CASE("encode-decode gradcheck") {
  ModelConfig cfg;
  cfg.stages = 2;
  cfg.layers_per_stage = 2;
  cfg.hidden_dim = 4;
  cfg.latent_dim = 3;
  const Autoencoder<double> ae(cfg, 2, 2, 4);
  const Td x = random_input({1, 2, 8, 2}, 5);
  const Td mask = Td::full({1, 8}, 1.0);
  const Td w = random_input({1, 2, 8, 2}, 6);
  const auto report = oracle::gradcheck(ae.parameters(), [&] { return sum_all(mul(ae.decode(ae.encode(x, mask), mask), w)); }, 1e-6);
  CHECK(report.max_rel_error <= 1e-3);
}

TEST_CASE("invalid model configs are rejected") {
  ModelConfig cfg;
  cfg.kernel = 4;
  CHECK_THROWS_AS(Autoencoder<float>(cfg, 3, 2, 0), InvalidArgument);
  cfg.kernel = 3;
  cfg.stages = 0;
  CHECK_THROWS_AS(Autoencoder<float>(cfg, 3, 2, 0), InvalidArgument);
  CHECK_THROWS_AS(Autoencoder<float>(ModelConfig{}, 0, 2, 0), InvalidArgument);
}
