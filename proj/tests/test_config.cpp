#include <doctest.h>

#include <string>

#include "asvlab/config.hpp"
#include "test_util.hpp"

using namespace asv;

TEST_CASE("empty config equals built-in defaults") {
  TempDir tmp;
  const auto p = tmp.file("empty.cfg", "# nothing overridden\n");
  const RunConfig loaded = load_run_config(p);
  const RunConfig defaults;
  CHECK(config_hash(loaded) == config_hash(defaults));
  CHECK(loaded.hull.mass == 35.96);
  CHECK(loaded.hydro_nominal.xu == 16.45);
  CHECK(loaded.hydro_identified.xuu == 17.26);
  CHECK(loaded.ppo.batch_size == 16384);
}

TEST_CASE("overrides reach their fields") {
  TempDir tmp;
  const auto p = tmp.file("o.cfg",
                          "[run]\n"
                          "master_seed = 17\n"
                          "out_dir = somewhere\n"
                          "[hull]\n"
                          "mass = 40.5\n"
                          "[env]\n"
                          "goal_bearing_max_deg = 90\n"
                          "[randomization]\n"
                          "obs_noise = off\n"
                          "[ppo]\n"
                          "batch_size = 2048\n"
                          "minibatch_count = 8\n");
  const RunConfig c = load_run_config(p);
  CHECK(c.master_seed == 17);
  CHECK(c.out_dir == "somewhere");
  CHECK(c.hull.mass == 40.5);
  CHECK(c.env.goal_bearing_max == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK_FALSE(c.randomization.obs_noise);
  CHECK(c.ppo.batch_size == 2048);
}

TEST_CASE("unknown section is rejected") {
  TempDir tmp;
  const auto p = tmp.file("bad.cfg", "[boat]\nmass = 1\n");
  CHECK_THROWS_WITH_AS(load_run_config(p),
                       doctest::Contains("unknown section [boat]"),
                       ConfigError);
}

TEST_CASE("unknown key is rejected with line number") {
  TempDir tmp;
  const auto p = tmp.file("bad.cfg", "[hull]\nmaas = 1\n");
  try {
    load_run_config(p);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("maas") != std::string::npos);
    CHECK(msg.find(":2") != std::string::npos);
  }
}

TEST_CASE("duplicate key is rejected") {
  TempDir tmp;
  const auto p = tmp.file("dup.cfg", "[hull]\nmass = 1\nmass = 2\n");
  CHECK_THROWS_WITH_AS(load_run_config(p), doctest::Contains("duplicate"),
                       ConfigError);
}

TEST_CASE("key before any section is rejected") {
  TempDir tmp;
  const auto p = tmp.file("loose.cfg", "mass = 1\n");
  CHECK_THROWS_AS(load_run_config(p), ConfigError);
}

TEST_CASE("malformed lines are rejected") {
  TempDir tmp;
  CHECK_THROWS_AS(load_run_config(tmp.file("a.cfg", "[hull\nmass = 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_run_config(tmp.file("b.cfg", "[hull]\nmass 1\n")),
                  ConfigError);
  CHECK_THROWS_AS(load_run_config(tmp.file("c.cfg", "[hull]\nmass = abc\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      load_run_config(tmp.file("d.cfg", "[randomization]\nobs_noise = maybe\n")),
      ConfigError);
}

TEST_CASE("bool spellings") {
  TempDir tmp;
  for (const char* t : {"on", "true", "1"}) {
    const RunConfig c = load_run_config(tmp.file(
        std::string("t_") + t + ".cfg",
        std::string("[eval]\ndisturbances = ") + t + "\n"));
    CHECK(c.eval.disturbances);
  }
  for (const char* f : {"off", "false", "0"}) {
    const RunConfig c = load_run_config(tmp.file(
        std::string("f_") + f + ".cfg",
        std::string("[randomization]\ndisturbances = ") + f + "\n"));
    CHECK_FALSE(c.randomization.disturbances);
  }
}

TEST_CASE("resolved config round-trips") {
  TempDir tmp;
  RunConfig c;
  c.master_seed = 99;
  c.hull.mass = 41.0;
  c.env.goal_bearing_max = deg2rad(30.0);
  c.randomization.disturbances = false;
  c.ppo.learning_rate = 3e-4;
  const auto p = tmp.path / "resolved.cfg";
  write_resolved_config(c, p);
  const RunConfig back = load_run_config(p);
  CHECK(config_hash(back) == config_hash(c));
  CHECK(back.master_seed == 99);
  CHECK(back.hull.mass == 41.0);
  CHECK(back.env.goal_bearing_max == doctest::Approx(deg2rad(30.0)));
  CHECK(back.ppo.learning_rate == 3e-4);
}

TEST_CASE("hydro overlay updates the identified set only") {
  TempDir tmp;
  RunConfig c;
  const auto p = tmp.file("fit.cfg", "[hydro]\nxu = 0.5\nxuu = 16.9\n");
  apply_hydro_overlay(c, p);
  CHECK(c.hydro_identified.xu == 0.5);
  CHECK(c.hydro_identified.xuu == 16.9);
  CHECK(c.hydro_identified.nr == 0.83);   // untouched
  CHECK(c.hydro_nominal.xu == 16.45);     // untouched

  CHECK_THROWS_AS(
      apply_hydro_overlay(c, tmp.file("bad1.cfg", "[hull]\nmass = 1\n")),
      ConfigError);
  CHECK_THROWS_AS(
      apply_hydro_overlay(c, tmp.file("bad2.cfg", "[hydro]\nbogus = 1\n")),
      ConfigError);
}

TEST_CASE("validation failures") {
  TempDir tmp;
  // Draft beyond hull height: mass / (rho * area) = 80/(1000*0.24) = 0.333 m.
  CHECK_THROWS_WITH_AS(load_run_config(tmp.file("heavy.cfg",
                                                "[hull]\nmass = 80\n")),
                       doctest::Contains("draft"), ConfigError);
  CHECK_THROWS_AS(
      load_run_config(tmp.file("div.cfg",
                               "[ppo]\nbatch_size = 100\nminibatch_count = 3\n")),
      ConfigError);
  CHECK_THROWS_AS(
      load_run_config(tmp.file("negdamp.cfg", "[hydro_nominal]\nxu = -1\n")),
      ConfigError);
  CHECK_THROWS_AS(load_run_config(tmp.file(
                      "scale.cfg",
                      "[randomization]\nthrust_scale_low = 1.2\n"
                      "thrust_scale_high = 1.0\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      load_run_config(tmp.file("run.cfg", "[env]\nrunaway_distance = 5\n")),
      ConfigError);
}

TEST_CASE("identified thruster curve CSVs load and validate") {
  TempDir tmp;
  tmp.file("left.csv",
           "command,force_n\n-1,-11.8\n-0.5,-6.1\n0,0\n0.5,12.9\n1,24.2\n");
  const auto cfg_path =
      tmp.file("c.cfg", "[thruster]\nidentified_left_csv = left.csv\n");
  const RunConfig c = load_run_config(cfg_path);
  REQUIRE(c.thruster.identified_left.command.size() == 5);
  CHECK(c.thruster.identified_left.force[4] == 24.2);
  CHECK(c.thruster.identified_right.command.empty());

  tmp.file("bad.csv", "command,force_n\n0,0\n0.5,5\n0.4,6\n");
  CHECK_THROWS_AS(
      load_run_config(
          tmp.file("bad.cfg", "[thruster]\nidentified_left_csv = bad.csv\n")),
      ConfigError);
  tmp.file("nobracket.csv", "command,force_n\n0.2,1\n0.5,5\n");
  CHECK_THROWS_AS(load_run_config(tmp.file(
                      "nb.cfg",
                      "[thruster]\nidentified_left_csv = nobracket.csv\n")),
                  ConfigError);
}

TEST_CASE("variant names") {
  CHECK(variant_from_name("NV").hydro_source == HydroSource::kNominal);
  CHECK(variant_from_name("NV").thrust_randomization == 0.0);
  CHECK(variant_from_name("NV-DR").thrust_randomization == 0.5);
  CHECK(variant_from_name("SID").hydro_source == HydroSource::kIdentified);
  CHECK(variant_from_name("SID-DR").hydro_source ==
        HydroSource::kIdentified);
  CHECK(variant_from_name("SID-DR").thrust_randomization == 0.5);
  CHECK_THROWS_AS(variant_from_name("SID_DR"), ConfigError);
}

TEST_CASE("config hash tracks content") {
  RunConfig a, b;
  CHECK(config_hash(a) == config_hash(b));
  b.reward.lambda6 = 31.0;
  CHECK(config_hash(a) != config_hash(b));
}
