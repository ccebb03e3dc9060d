#include <algorithm>
#include <stdexcept>

#include "doctest.h"
#include "test_util.hpp"
#include "tslam/config/config.hpp"

TEST_CASE("config defaults validate and round-trip") {
  ts::cfg::RunConfig rc;
  CHECK_NOTHROW(rc.validate());

  const std::string text = ts::cfg::canonical_text(rc);
  const ts::cfg::RunConfig back = ts::cfg::parse_config(text);
  CHECK(ts::cfg::canonical_text(back) == text);
  CHECK(ts::cfg::config_digest(back) == ts::cfg::config_digest(rc));

  const auto keys = ts::cfg::config_keys();
  CHECK(keys.size() >= 40);
  CHECK(std::is_sorted(keys.begin(), keys.end()));
  for (const auto& k : keys) CHECK(text.find(k + "=") != std::string::npos);
}

TEST_CASE("config rejects malformed input") {
  CHECK_THROWS_AS(ts::cfg::parse_config("no.such.key=1\n"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_config("grid.n=32\ngrid.n=16\n"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_config("grid.n=banana\n"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_config("grid.n\n"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_config("rl.share_encoder=maybe\n"), std::invalid_argument);

  ts::cfg::RunConfig rc;
  CHECK_THROWS_AS(ts::cfg::set_key(rc, "bogus", "1"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::get_key(rc, "bogus"), std::invalid_argument);
}

TEST_CASE("config parsing tolerates comments and spacing") {
  const std::string text =
      "# run configuration\n"
      "\n"
      "  grid.n = 16  \n"
      "\treward.lambda =0.25\n"
      "rl.share_encoder= false\n";
  const auto rc = ts::cfg::parse_config(text);
  CHECK(rc.grid_n == 16);
  CHECK(rc.reward_lambda == 0.25);
  CHECK(rc.rl_share_encoder == false);
  CHECK(ts::cfg::get_key(rc, "grid.n") == "16");
  CHECK(ts::cfg::get_key(rc, "rl.share_encoder") == "false");
}

TEST_CASE("config digest tracks content, not formatting") {
  ts::cfg::RunConfig rc;
  const auto base = ts::cfg::config_digest(rc);

  const auto commented = ts::cfg::parse_config("# nothing set\n\n");
  CHECK(ts::cfg::config_digest(commented) == base);

  const auto reordered =
      ts::cfg::parse_config("reward.lambda = 0.1\nseed = 0\n# trailing comment\n");
  CHECK(ts::cfg::config_digest(reordered) == base);

  for (const char* change : {"seed=1", "grid.n=16", "reward.lambda=0.2", "ppo.lr=0.001",
                             "paths.out=elsewhere", "rl.share_encoder=false"}) {
    auto c = ts::cfg::parse_config(std::string(change) + "\n");
    CHECK(ts::cfg::config_digest(c) != base);
  }
}

TEST_CASE("config numeric canonicalization is stable") {
  ts::cfg::RunConfig rc;
  CHECK(ts::cfg::get_key(rc, "ppo.clip") == "0.2");
  CHECK(ts::cfg::get_key(rc, "ppo.lr") == "0.0003");
  CHECK(ts::cfg::get_key(rc, "ppo.ent_coef") == "0.001");
  CHECK(ts::cfg::get_key(rc, "probe.sensor_radius") == "0.015625");
  CHECK(ts::cfg::get_key(rc, "rl.log_std_init") == "-0.5");
  CHECK(ts::cfg::get_key(rc, "rl.budget_steps") == "200000");

  ts::cfg::set_key(rc, "reward.lambda", "1e-2");
  CHECK(ts::cfg::get_key(rc, "reward.lambda") == "0.01");
}

TEST_CASE("config int list parsing") {
  CHECK(ts::cfg::parse_int_list("8,16,32,32") == std::vector<int>{8, 16, 32, 32});
  CHECK(ts::cfg::parse_int_list(" 1 , 2 ,3") == std::vector<int>{1, 2, 3});
  CHECK_THROWS_AS(ts::cfg::parse_int_list("1,,2"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_int_list("1,a"), std::invalid_argument);
  CHECK_THROWS_AS(ts::cfg::parse_int_list(""), std::invalid_argument);
}

TEST_CASE("config module projections") {
  ts::cfg::RunConfig rc;

  const auto spec = ts::cfg::probe_spec(rc);
  CHECK(spec.horizon == 200);
  CHECK(spec.action_dim() == 28);
  CHECK(spec.step_ms == 30.0);

  const auto net = ts::cfg::net_config(rc);
  CHECK(net.grid_n == 32);
  CHECK(net.pose_dim == 28);
  CHECK(net.action_dim == 28);
  CHECK(net.hidden == std::vector<int>{256, 128, 64});
  CHECK(net.share_encoder);

  const auto tc = ts::cfg::train_config(rc);
  CHECK(tc.budget_steps == 200000);
  CHECK(tc.n_envs == 8);
  CHECK(tc.pose_count == 4);
  CHECK(tc.config_digest == ts::cfg::config_digest(rc));
  CHECK(tc.seed == ts::derive_seed(rc.seed, "train-explore"));
  CHECK(tc.seed != rc.seed);

  const auto rcn = ts::cfg::recon_config(rc);
  CHECK(rcn.grid_n == 32);
  CHECK(rcn.channels == std::vector<int>{8, 16, 32, 32});
  CHECK(rcn.decoder_hidden == std::vector<int>{128, 128, 128});
  CHECK(rcn.seed == ts::derive_seed(rc.seed, "train-recon"));
  CHECK(rcn.config_digest == tc.config_digest);

  const auto rw = ts::cfg::reward_config(rc);
  CHECK(rw.variant == ts::reward::Variant::kDiscoveryCoverage);
  CHECK(rw.lambda == 0.1);

  ts::cfg::set_key(rc, "eval.aggregation", "median");
  CHECK_THROWS_AS(rc.validate(), std::invalid_argument);
}

TEST_CASE("config file loading") {
  const auto path = ttest::write_file("run.cfg", "grid.n=16\nseed=42\n");
  const auto rc = ts::cfg::load_config(path.string());
  CHECK(rc.grid_n == 16);
  CHECK(rc.seed == 42);
  CHECK_THROWS_AS(ts::cfg::load_config("/nonexistent/x.cfg"), std::runtime_error);
}
