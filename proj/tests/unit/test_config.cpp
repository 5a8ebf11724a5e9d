#include <gtest/gtest.h>

#include "tvgnn/config.hpp"
#include "tvgnn/errors.hpp"

using namespace tvgnn;
using namespace tvgnn::pipeline;

TEST(ModelConfig, DefaultsFollowTheReferenceSetup) {
  const ModelConfig c;
  EXPECT_EQ(c.lr, 5e-4);
  EXPECT_EQ(c.weight_decay, 1e-7);
  EXPECT_EQ(c.d_hidden, 64u);
  EXPECT_EQ(c.dialogue_layers, 2u);
  EXPECT_EQ(c.dialogue_heads, 8u);
  EXPECT_EQ(c.network_layers, 3u);
  EXPECT_EQ(c.network_heads, 1u);
  EXPECT_EQ(c.patience, 10u);
  EXPECT_EQ(c.horizons, (std::vector<int>{3, 7, 15}));
  EXPECT_EQ(c.threshold, 0.15);
  EXPECT_NO_THROW(c.validate());
}

TEST(ModelConfig, FormatParseRoundTrip) {
  ModelConfig c;
  c.lr = 1.0 / 3.0;
  c.d_hidden = 16;
  c.dialogue_heads = 4;
  c.horizons = {15, 3};
  c.joint_heads = true;
  c.seed = 18446744073709551615ull;
  c.window = data::WindowMode::CalendarDays;
  c.pool_norm = market::PoolNorm::Literal;
  const auto parsed = parse_model_config(format_model_config(c));
  EXPECT_EQ(parsed.config, c);
  EXPECT_EQ(parsed.config.lr, c.lr);
  EXPECT_EQ(parsed.config.seed, c.seed);
}

TEST(ModelConfig, PartialFileKeepsDefaultsAndRecordsKeys) {
  const auto p = parse_model_config("# small run\nd_hidden = 32\n\n  lr=0.01   # faster\nhorizons = 3,7\n");
  EXPECT_EQ(p.config.d_hidden, 32u);
  EXPECT_EQ(p.config.lr, 0.01);
  EXPECT_EQ(p.config.horizons, (std::vector<int>{3, 7}));
  EXPECT_EQ(p.config.patience, 10u);
  EXPECT_EQ(p.keys, (std::set<std::string>{"d_hidden", "lr", "horizons"}));
}

TEST(ModelConfig, RejectsBadInput) {
  EXPECT_THROW(parse_model_config("d_hidden = 32\nd_hidden = 64\n"), ConfigError);
  EXPECT_THROW(parse_model_config("learning_rate = 0.1\n"), ConfigError);
  EXPECT_THROW(parse_model_config("lr 0.1\n"), ConfigError);
  EXPECT_THROW(parse_model_config("lr = fast\n"), ConfigError);
  EXPECT_THROW(parse_model_config("max_epochs = -1\n"), ConfigError);
  EXPECT_THROW(parse_model_config("joint_heads = maybe\n"), ConfigError);
  EXPECT_THROW(parse_model_config("window = weekly\n"), ConfigError);
  EXPECT_THROW(parse_model_config("horizons = 3,5\n"), ConfigError);
  EXPECT_THROW(parse_model_config("horizons = 3,3\n"), ConfigError);
  EXPECT_THROW(parse_model_config("d_hidden = 30\n"), ConfigError);  // 8 heads
  EXPECT_THROW(parse_model_config("network_heads = 2\n"), ConfigError);
  EXPECT_THROW(parse_model_config("validation_year = 2017\n"), ConfigError);
}

TEST(ModelConfig, ErrorsNameTheField) {
  try {
    parse_model_config("lr = -1\n");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("'lr'"), std::string::npos);
  }
}

TEST(ModelConfig, DialogueViewSharesStructuralWidth) {
  ModelConfig c;
  c.d_struct = 5;
  const auto d = c.dialogue();
  EXPECT_EQ(d.d_pos, 5u);
  EXPECT_EQ(d.d_part, 5u);
  EXPECT_EQ(d.input_width(), c.sentence_dim + 20);
}

TEST(SynthConfigFile, RoundTripAndUnknownKeys) {
  data::SynthConfig s;
  s.num_companies = 17;
  s.signal_strength = 0.0;
  s.emit_text = true;
  const auto back = parse_synth_config(format_synth_config(s));
  EXPECT_EQ(back.num_companies, 17u);
  EXPECT_EQ(back.signal_strength, 0.0);
  EXPECT_TRUE(back.emit_text);
  EXPECT_EQ(format_synth_config(back), format_synth_config(s));
  EXPECT_THROW(parse_synth_config("companies = 3\n"), ConfigError);
  EXPECT_THROW(parse_synth_config("num_companies = 1\n"), ConfigError);
}
