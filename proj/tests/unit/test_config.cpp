#include <gtest/gtest.h>

#include "bdris/config.hpp"

namespace bdris {
namespace {

TEST(Config, DefaultsAreValid) {
  const ExperimentConfig c;
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.models.size(), 3u);
}

TEST(Config, ParsesKeyValueLinesWithComments) {
  const ExperimentConfig c = parse_config(
      "# sweep\n"
      "experiment = fig\n"
      "scenario = nearfield-tx   # trailing comment\n"
      "system = mimo-single-stream\n"
      "n_t = 2\n n_r=3\n"
      "n_i = 16, 36,64\n"
      "spacing = 0.25,0.5\n"
      "distance = 0.1, 1e0\n"
      "models = exact, app3\n"
      "topology = band:3\n"
      "rate_unit = nats\n"
      "record_timing = yes\n"
      "seed = 42\n");
  EXPECT_EQ(c.experiment, "fig");
  EXPECT_EQ(c.scenario, ScenarioKind::kNearFieldTx);
  EXPECT_EQ(c.system, SystemKind::kMimoSingleStream);
  EXPECT_EQ(c.n_t, 2);
  EXPECT_EQ(c.n_r, 3);
  EXPECT_EQ(c.n_i, (std::vector<int>{16, 36, 64}));
  EXPECT_EQ(c.spacing, (std::vector<double>{0.25, 0.5}));
  EXPECT_EQ(c.distance, (std::vector<double>{0.1, 1.0}));
  EXPECT_EQ(c.models, (std::vector<ChannelModel>{ChannelModel::kExact, ChannelModel::kApp3}));
  EXPECT_EQ(c.topology, "band:3");
  EXPECT_FALSE(c.rate_in_bits);
  EXPECT_TRUE(c.record_timing);
  EXPECT_EQ(c.seed, 42u);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, ErrorsCarryLineNumbers) {
  try {
    parse_config("n_t = 1\nbogus = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
  EXPECT_THROW(parse_config("n_t 1\n"), ConfigError);
  EXPECT_THROW(parse_config("n_t = one\n"), ConfigError);
  EXPECT_THROW(parse_config("spacing = 0.5x\n"), ConfigError);
  EXPECT_THROW(parse_config("models = exact, app9\n"), ConfigError);
  EXPECT_THROW(parse_config("scenario = moon\n"), ConfigError);
  EXPECT_THROW(parse_config("seed = -1\n"), ConfigError);
  EXPECT_THROW(parse_config("record_timing = maybe\n"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.cfg"), ConfigError);
}

TEST(Config, ValidationCatchesInconsistentSettings) {
  ExperimentConfig c;
  c.n_t = 2;
  EXPECT_THROW(c.validate(), ConfigError);  // siso needs 1 x 1
  c = ExperimentConfig{};
  c.trials = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ExperimentConfig{};
  c.topology = "group:5";
  EXPECT_THROW(c.validate(), ConfigError);  // 5 does not divide 64
  c.topology = "optimal";
  EXPECT_NO_THROW(c.validate());
  c = ExperimentConfig{};
  c.spacing = {0.5, -1.0};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Config, OverridesApplyOnTop) {
  ExperimentConfig c = parse_config("trials = 10\n");
  apply_overrides(c, {{"trials", "3"}, {"n_i", "4"}});
  EXPECT_EQ(c.trials, 3);
  EXPECT_EQ(c.n_i, (std::vector<int>{4}));
  EXPECT_THROW(apply_overrides(c, {{"nope", "1"}}), ConfigError);
  const auto keys = ExperimentConfig::keys();
  EXPECT_NE(std::find(keys.begin(), keys.end(), "admm_tol_obj"), keys.end());
}

TEST(Config, DbmConversion) {
  EXPECT_NEAR(dbm_to_watts(30.0), 1.0, 1e-15);
  EXPECT_NEAR(dbm_to_watts(20.0), 0.1, 1e-15);
  EXPECT_NEAR(dbm_to_watts(-80.0), 1e-11, 1e-25);
}

}  // namespace
}  // namespace bdris
