#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "fixtures.hpp"
#include "tvgnn/errors.hpp"
#include "tvgnn/gradcheck.hpp"
#include "tvgnn/model.hpp"
#include "tvgnn/synth.hpp"

using namespace tvgnn;
using namespace tvgnn::pipeline;

namespace {

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("tvgnn_model_" + name);
}

}  // namespace

TEST(Model, FreshHeadsPredictTheOutputBias) {
  const auto cfg = fixture::tiny_config();
  const auto q = fixture::random_quarter(9, 3, cfg, 1);
  auto model = TvgnnModel::create(cfg, {3, 7, 15}, 4);
  model.set_output_bias(7, -3.5);
  const Tensor y = model.forward(q).predictions.value();
  ASSERT_EQ(y.shape(), (Shape{9, 3}));
  for (std::size_t i = 0; i < 9; ++i) {
    EXPECT_EQ(y(i, 0), 0.0);
    EXPECT_EQ(y(i, 1), -3.5);
    EXPECT_EQ(y(i, 2), 0.0);
  }
}

TEST(Model, HeadFollowsTheTwoLayerFormula) {
  const auto cfg = fixture::tiny_config();
  const auto q = fixture::random_quarter(6, 2, cfg, 2);
  auto model = TvgnnModel::create(cfg, {3}, 5);
  Rng rng(6);
  auto& w2 = model.params().get("head3.l2.w").node()->value;
  w2 = fixture::random_tensor(1, cfg.head_hidden, rng);
  model.set_output_bias(3, 0.25);
  const auto r = model.forward(q);
  const Tensor v = r.encoder.embeddings.value();
  const Tensor w1 = model.params().get("head3.l1.w").value(), b1 = model.params().get("head3.l1.b").value();
  for (std::size_t i = 0; i < 6; ++i) {
    double y = 0.25;
    for (std::size_t h = 0; h < cfg.head_hidden; ++h) {
      double z = b1[h];
      for (std::size_t c = 0; c < cfg.d_hidden; ++c) z += v(i, c) * w1(h, c);
      y += std::max(0.0, z) * w2[h];
    }
    EXPECT_NEAR(r.predictions.value()(i, 0), y, 1e-12);
  }
}

TEST(Model, OneOutputRowPerNode) {
  const auto cfg = fixture::tiny_config();
  for (std::size_t n : {1u, 5u, 17u}) {
    const auto q = fixture::random_quarter(n, 3, cfg, n);
    EXPECT_EQ(ModelBundle::create(cfg).predict(q).rows(), n);
  }
}

TEST(Model, FullPipelineGradientCheck) {
  const auto cfg = fixture::tiny_config(1, 2);
  const auto q = fixture::random_quarter(5, 2, cfg, 7, 0.7, 2);
  ASSERT_EQ(q.graph.date_groups.size(), 2u);
  auto model = TvgnnModel::create(cfg, {3}, 8);
  // Non-zero output weights so gradients reach the encoders.
  Rng rng(9);
  model.params().get("head3.l2.w").node()->value = fixture::random_tensor(1, cfg.head_hidden, rng);
  const auto report = grad_check(
      [&] { return ag::masked_mse(model.forward(q).predictions, Tensor::matrix(5, 1, -4.0), std::vector<char>(5, 1)); },
      model.params());
  EXPECT_TRUE(report.passed()) << report.violations.size() << " violations, worst " << report.max_rel_error << " at "
                               << report.worst_param;
  EXPECT_EQ(report.checked, model.params().num_scalars());
}

TEST(Model, JointHeadsAreIsolated) {
  auto cfg = fixture::tiny_config();
  cfg.joint_heads = true;
  const auto q = fixture::random_quarter(8, 3, cfg, 10);
  auto model = TvgnnModel::create(cfg, {3, 7, 15}, 11);
  Rng rng(12);
  for (const char* h : {"head3.l2.w", "head7.l2.w", "head15.l2.w"})
    model.params().get(h).node()->value = fixture::random_tensor(1, cfg.head_hidden, rng);
  model.params().zero_grad();
  const auto pred = model.forward(q).predictions;
  Tensor target = Tensor::matrix(8, 1, -4.0);
  ag::backward(ag::masked_mse(ag::slice_cols(pred, 0, 1), target, std::vector<char>(8, 1)));
  for (const auto& e : model.params().entries()) {
    const bool other_head = e.name.starts_with("head7.") || e.name.starts_with("head15.");
    double g = 0.0;
    for (double x : e.var.grad().data()) g = std::max(g, std::abs(x));
    if (other_head)
      EXPECT_EQ(g, 0.0) << e.name;
    else if (e.name == "head3.l2.b")
      EXPECT_GT(g, 0.0);
  }
}

TEST(Model, JointAndSeparateLossesAgreeWhenHeadsShareAnEncoder) {
  // A single-horizon model and the matching column of a joint model built
  // from the same seed share every encoder parameter, so with zeroed output
  // weights both predict b2 and see the same per-horizon loss.
  auto cfg = fixture::tiny_config();
  const auto q = fixture::random_quarter(8, 3, cfg, 13);
  auto solo = TvgnnModel::create(cfg, {3}, 14);
  auto joint = TvgnnModel::create(cfg, {3, 7, 15}, 14);
  solo.set_output_bias(3, -4.0);
  joint.set_output_bias(3, -4.0);
  const Tensor a = solo.forward(q).predictions.value();
  const Tensor b = joint.forward(q).predictions.value();
  for (std::size_t i = 0; i < 8; ++i) EXPECT_EQ(a(i, 0), b(i, 0));
  EXPECT_EQ(solo.forward(q).encoder.embeddings.value(), joint.forward(q).encoder.embeddings.value());
}

TEST(Model, LaterCallsNeverMoveEarlierPredictions) {
  const auto cfg = fixture::tiny_config(1, 3);
  auto q = fixture::random_quarter(12, 4, cfg, 15, 0.6);
  const auto bundle = ModelBundle::create(cfg);
  // Give the heads real weights so predictions depend on the embeddings.
  auto b = bundle.clone();
  Rng rng(16);
  for (auto& m : b.models) {
    const std::string h = "head" + std::to_string(m.horizons()[0]) + ".l2.w";
    m.params().get(h).node()->value = fixture::random_tensor(1, cfg.head_hidden, rng);
  }
  const Tensor base = b.predict(q);
  const Date last = q.graph.date_groups.back().date;
  for (std::size_t i = 0; i < q.num_nodes(); ++i)
    if (q.graph.nodes[i].call_date == last)
      for (double& x : q.calls[i].sentences.data()) x += 1.0;
  const Tensor pert = b.predict(q);
  bool changed = false;
  for (std::size_t i = 0; i < q.num_nodes(); ++i)
    for (std::size_t k = 0; k < 3; ++k) {
      if (q.graph.nodes[i].call_date < last)
        EXPECT_EQ(base(i, k), pert(i, k));
      else
        changed |= base(i, k) != pert(i, k);
    }
  EXPECT_TRUE(changed);
}

TEST(Bundle, OneModelPerHorizonUnlessJoint) {
  auto cfg = fixture::tiny_config();
  auto b = ModelBundle::create(cfg);
  ASSERT_EQ(b.models.size(), 3u);
  EXPECT_EQ(b.model_for(7).horizons(), std::vector<int>{7});
  EXPECT_NE(b.models[0].seed(), b.models[1].seed());
  cfg.joint_heads = true;
  b = ModelBundle::create(cfg);
  ASSERT_EQ(b.models.size(), 1u);
  EXPECT_EQ(&b.model_for(3), &b.model_for(15));
}

TEST(Bundle, UncoveredHorizonsPredictNan) {
  auto cfg = fixture::tiny_config();
  cfg.horizons = {7};
  const auto q = fixture::random_quarter(4, 2, cfg, 17);
  const auto b = ModelBundle::create(cfg);
  const Tensor y = b.predict(q);
  EXPECT_TRUE(std::isnan(y(0, 0)));
  EXPECT_FALSE(std::isnan(y(0, 1)));
  EXPECT_TRUE(std::isnan(y(0, 2)));
  EXPECT_THROW(b.model_for(3), ConfigError);
}

TEST(Bundle, CloneIsIndependent) {
  const auto cfg = fixture::tiny_config();
  auto a = ModelBundle::create(cfg);
  auto b = a.clone();
  const auto fp = a.models[0].params().fingerprint();
  b.models[0].set_output_bias(3, 9.0);
  EXPECT_EQ(a.models[0].params().fingerprint(), fp);
  EXPECT_NE(b.models[0].params().fingerprint(), fp);
}

TEST(Checkpoint, RoundTripReproducesPredictions) {
  auto cfg = fixture::tiny_config();
  cfg.seed = 99;
  const auto q = fixture::random_quarter(7, 3, cfg, 18);
  auto b = ModelBundle::create(cfg);
  b.models[1].set_output_bias(7, -2.0);
  const auto path = temp_path("ckpt.bin");
  save_checkpoint(path, b);
  const auto back = load_checkpoint(path);
  EXPECT_EQ(back.config, cfg);
  ASSERT_EQ(back.models.size(), 3u);
  for (std::size_t m = 0; m < 3; ++m) {
    EXPECT_EQ(back.models[m].seed(), b.models[m].seed());
    EXPECT_EQ(back.models[m].params().fingerprint(), b.models[m].params().fingerprint());
  }
  const Tensor y0 = b.predict(q), y1 = back.predict(q);
  EXPECT_EQ(y0, y1);
}

TEST(Checkpoint, CorruptionIsDetected) {
  const auto cfg = fixture::tiny_config();
  const auto path = temp_path("ckpt_bad.bin");
  save_checkpoint(path, ModelBundle::create(cfg));
  std::string bytes;
  {
    std::ifstream in(path, std::ios::binary);
    bytes.assign(std::istreambuf_iterator<char>(in), {});
  }
  auto write = [&](const std::string& b) { std::ofstream(path, std::ios::binary) << b; };
  std::string flipped = bytes;
  flipped[flipped.size() / 2] ^= 0x40;
  write(flipped);
  EXPECT_THROW(load_checkpoint(path), DataError);
  write(bytes.substr(0, bytes.size() - 3));
  EXPECT_THROW(load_checkpoint(path), DataError);
  write(bytes + "x");
  EXPECT_THROW(load_checkpoint(path), DataError);
  write("NOTACKPT" + bytes.substr(8));
  EXPECT_THROW(load_checkpoint(path), DataError);
}

TEST(Dataset, AssembledFromSyntheticCorpus) {
  data::SynthConfig sc;
  sc.num_companies = 12;
  sc.num_quarters = 12;
  sc.sentence_dim = 4;
  const auto ds = data::gen_synthetic(sc, 3);
  auto cfg = fixture::tiny_config();
  const auto d = assemble_dataset(ds.transcripts, ds.prices, ds.relations, cfg);
  ASSERT_EQ(d.quarters.size(), 12u);
  std::size_t nodes = 0;
  for (std::size_t k = 0; k < d.quarters.size(); ++k) {
    const auto& q = d.quarters[k];
    if (k > 0) EXPECT_LT(d.quarters[k - 1].graph.quarter, q.graph.quarter);
    EXPECT_EQ(q.calls.size(), q.num_nodes());
    for (std::size_t i = 0; i < q.num_nodes(); ++i) {
      EXPECT_EQ(q.calls[i].call_id, q.graph.nodes[i].call_id);
      if (q.labeled[i])
        for (std::size_t c = 0; c < 3; ++c) EXPECT_FALSE(std::isnan(q.labels(i, c)));
    }
    nodes += q.num_nodes();
  }
  // Every call is either labeled or itemized as an exclusion.
  EXPECT_EQ(nodes, ds.transcripts.size());
  EXPECT_EQ(d.num_labeled() + d.exclusions.size(), nodes);
  EXPECT_EQ(d.with_split(data::SplitTag::Train).size(), 4u);
  EXPECT_EQ(d.with_split(data::SplitTag::Validation).size(), 4u);
  EXPECT_EQ(d.with_split(data::SplitTag::Test).size(), 4u);
  EXPECT_EQ(infer_sentence_dim(ds.transcripts), 4u);
}

TEST(Dataset, MissingPricesKeepTheNodeWithoutLabels) {
  data::SynthConfig sc;
  sc.num_companies = 6;
  sc.num_quarters = 3;
  sc.sentence_dim = 4;
  auto ds = data::gen_synthetic(sc, 4);
  const std::string dropped = ds.prices[0].company_id;
  ds.prices.erase(ds.prices.begin());
  const auto d = assemble_dataset(ds.transcripts, ds.prices, ds.relations, fixture::tiny_config());
  for (const auto& q : d.quarters)
    for (std::size_t i = 0; i < q.num_nodes(); ++i)
      if (q.graph.nodes[i].company_id == dropped) EXPECT_FALSE(q.labeled[i]);
  EXPECT_GE(d.exclusions.size(), 3u);
}
