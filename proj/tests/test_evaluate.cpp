#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <set>

#include "stlq/evaluate.hpp"
#include "stlq/fmdp.hpp"
#include "stlq/grid.hpp"
#include "stlq/logsumexp.hpp"
#include "stlq/parser.hpp"
#include "support/brute_force.hpp"
#include "support/tiny_instances.hpp"

using namespace stlq;

TEST_CASE("log-sum-exp surrogates: anchors and closed forms") {
  const double one[] = {0.75};
  CHECK(log_sum_exp_max(one, 3.0) == 0.75);
  CHECK(log_sum_exp_min(one, 3.0) == 0.75);

  const double pair[] = {0.0, 0.0};
  CHECK(log_sum_exp_max(pair, 1.0) == Catch::Approx(std::log(2.0)));
  CHECK(log_sum_exp_min(pair, 1.0) == Catch::Approx(-std::log(2.0)));

  CHECK_THROWS_AS(log_sum_exp_max(std::span<const double>{}, 1.0), error);
  CHECK_THROWS_AS(log_sum_exp_min(std::span<const double>{}, 1.0), error);
}

TEST_CASE("log-sum-exp surrogates respect the additive error band") {
  rng_stream rng(31337);
  for (int trial = 0; trial < 20000; ++trial) {
    const std::size_t n = 1 + rng.next_below(8);
    std::vector<double> values;
    for (std::size_t i = 0; i < n; ++i)
      values.push_back((rng.next_unit() - 0.5) * 2000.0);
    const double beta = 0.5 + rng.next_unit() * 99.5;
    const double hi = *std::max_element(values.begin(), values.end());
    const double lo = *std::min_element(values.begin(), values.end());
    const double band = std::log(static_cast<double>(n)) / beta;

    const double smax = log_sum_exp_max(values, beta);
    const double smin = log_sum_exp_min(values, beta);
    REQUIRE(smax >= hi);
    REQUIRE(smax <= hi + band);
    REQUIRE(smin <= lo);
    REQUIRE(smin >= lo - band);
  }
}

TEST_CASE("approximation gap: value, limits, monotonicity") {
  auto r = theorem_gap(50.0, 7, 2);
  CHECK(r.gap == Catch::Approx(std::log(7.0) / 50.0));

  CHECK(theorem_gap(1e7, 9, 1).gap < 1e-6);  // T - tau + 2 = 10

  double prev = theorem_gap(10.0, 7, 2).gap;
  for (double beta : {20.0, 40.0, 80.0, 160.0}) {
    const double g = theorem_gap(beta, 7, 2).gap;
    CHECK(g < prev);
    prev = g;
  }
  prev = theorem_gap(50.0, 2, 2).gap;
  for (int horizon : {3, 5, 9, 17}) {
    const double g = theorem_gap(50.0, horizon, 2).gap;
    CHECK(g > prev);
    prev = g;
  }
  CHECK_THROWS_AS(theorem_gap(0.0, 7, 2), config_error);
  CHECK_THROWS_AS(theorem_gap(50.0, 0, 2), config_error);
}

TEST_CASE("binomial interval brackets the estimate") {
  auto [lo, hi] = binomial_ci95(400, 500);
  CHECK(lo < 0.8);
  CHECK(hi > 0.8);
  CHECK(lo > 0.7);
  CHECK(hi < 0.9);

  auto [lo0, hi0] = binomial_ci95(0, 500);
  CHECK(lo0 == 0.0);
  CHECK(hi0 > 0.0);
  CHECK(hi0 < 0.02);
  auto [lon, hin] = binomial_ci95(500, 500);
  CHECK(hin == 1.0);
  CHECK(lon < 1.0);
  CHECK(lon > 0.98);
}

TEST_CASE("explicit model of a single-cell grid with one two-sample flag") {
  auto m = build_grid(grid_spec{1, 1});
  auto formula = parse_stl("F[0,3]( F[0,1](x>0) )");
  auto f = build_explicit_fmdp(m, formula, 1.0, 50.0);
  REQUIRE(f.num_states == 2);

  // Hand computation: the only cell satisfies x > 0, so from either flag
  // value every action moves to (cell, flag = 1) with certainty.
  for (int a = 0; a < f.num_actions; ++a)
    for (std::uint64_t s = 0; s < 2; ++s) {
      const auto& trs = f.trans[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)];
      REQUIRE(trs.size() == 1);
      CHECK(trs[0].to == 1);
      CHECK(trs[0].p == 1.0);
    }
  CHECK(f.sat01[0] == 1);  // flag 0 but the body holds now
  CHECK(f.sat01[1] == 1);
  CHECK(f.reward[0] == 1.0);
}

TEST_CASE("explicit model rows sum to one and the cap is honored") {
  auto m = build_grid(grid_spec{2, 2});
  auto formula = parse_stl("G[0,4]( F[0,1](x>1) & G[0,2](y<1) )");
  auto f = build_explicit_fmdp(m, formula, 1.0, 50.0, 64);
  CHECK(f.num_states == 4u * 2u * 3u);
  for (int a = 0; a < f.num_actions; ++a)
    for (std::uint64_t s = 0; s < f.num_states; ++s) {
      double total = 0.0;
      for (const auto& tr : f.trans[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)])
        total += tr.p;
      CHECK(total == Catch::Approx(1.0).margin(1e-12));
    }
  CHECK_THROWS_AS(build_explicit_fmdp(m, formula, 1.0, 50.0, 8), resource_error);
}

TEST_CASE("explicit model reaches exactly the states the stepper visits") {
  auto m = build_grid(grid_spec{2, 2});
  auto formula = parse_stl("F[0,6]( F[0,2](x>1 & y>1) )");
  auto f = build_explicit_fmdp(m, formula, 1.0, 50.0, 64);

  // Keys of the stepper match encode() on the same augmented state.
  fmdp_env env(m, formula, 1.0, 0, 50.0);
  std::set<std::uint64_t> visited;
  rng_stream rng(5);
  for (int trial = 0; trial < 2000; ++trial) {
    env.reset(rng.split(static_cast<std::uint64_t>(trial)));
    visited.insert(env.state_key());
    for (int t = 0; t < 50; ++t) {
      env.step(static_cast<int>(rng.next_below(9)));
      visited.insert(env.state_key());
      CHECK(env.state_key() == f.encode(env.env_state(), env.flags()));
    }
  }

  // Forward closure of the explicit model from the start state.
  std::set<std::uint64_t> reachable{f.encode(0, flag_vector::zeros(f.schema))};
  bool grew = true;
  while (grew) {
    grew = false;
    for (auto s : std::set<std::uint64_t>(reachable))
      for (int a = 0; a < f.num_actions; ++a)
        for (const auto& tr : f.trans[static_cast<std::size_t>(a)][static_cast<std::size_t>(s)])
          if (tr.p > 0 && reachable.insert(tr.to).second) grew = true;
  }
  CHECK(visited == reachable);
}

TEST_CASE("value iteration: zero rewards give zero values") {
  auto m = build_grid(grid_spec{2, 2});
  auto f = build_explicit_fmdp(m, parse_stl("F[0,4]( F[0,1](x>1) )"), 1.0, 50.0);
  std::fill(f.reward.begin(), f.reward.end(), 0.0);
  auto vi = value_iteration(f, 0.9, 6);
  for (const auto& layer : vi.values)
    for (double v : layer) CHECK(v == 0.0);
}

TEST_CASE("value iteration: absorbing chain has geometric values") {
  // det-line-reach holds the goal forever once entered; from the goal the
  // optimal value is the discounted sum of `horizon` further unit rewards.
  auto inst = tiny::det_line_reach();
  auto f = build_explicit_fmdp(inst.m, inst.formula, inst.dt, 50.0);
  const double gamma = 0.5;
  const int horizon = 8;
  auto vi = value_iteration(f, gamma, horizon);
  const auto goal = static_cast<std::size_t>(2);  // cell x=2.5, tau=1: id=env
  double expect = 0.0;
  for (int t = 0; t <= horizon; ++t) expect += std::pow(gamma, t);
  CHECK(vi.values[0][goal] == Catch::Approx(expect).epsilon(1e-12));
}

TEST_CASE("value iteration agrees with exhaustive enumeration") {
  const double gamma = 0.9999;
  for (const auto& inst : tiny::battery()) {
    auto f = build_explicit_fmdp(inst.m, inst.formula, inst.dt, 50.0);
    fmdp_env env(inst.m, inst.formula, inst.dt, inst.start, 50.0);
    const int T = env.horizon_steps();
    const auto start = f.encode(inst.start, flag_vector::zeros(f.schema));
    auto vi = value_iteration(f, gamma, T);

    const double via_tables = brute::best_time_policy_value(f, start, T, gamma);
    CHECK(vi.values[0][static_cast<std::size_t>(start)] ==
          Catch::Approx(via_tables).margin(1e-9));

    if (inst.deterministic) {
      const double via_sequences = brute::best_sequence_value(f, start, T, gamma);
      CHECK(vi.values[0][static_cast<std::size_t>(start)] ==
            Catch::Approx(via_sequences).margin(1e-9));
    }
  }
}

TEST_CASE("trained greedy policy matches value iteration on two instances") {
  // The full battery runs in the acceptance suite; keep two here as a
  // regression canary.
  for (const auto& inst : {tiny::det_line_reach(), tiny::hold_region()}) {
    auto f = build_explicit_fmdp(inst.m, inst.formula, inst.dt, inst.learn.beta);
    fmdp_env env(inst.m, inst.formula, inst.dt, inst.start, inst.learn.beta);
    const int T = env.horizon_steps();
    auto vi = value_iteration(f, inst.learn.gamma, T);
    auto result = train(env, inst.learn, 0);

    const auto start = f.encode(inst.start, flag_vector::zeros(f.schema));
    auto reach = brute::reachable_sets(f, start, T);
    std::set<std::uint32_t> states;
    for (int t = 0; t < T; ++t)
      states.insert(reach[static_cast<std::size_t>(t)].begin(),
                    reach[static_cast<std::size_t>(t)].end());
    for (auto s : states) {
      // instance design: the optimal action is time-invariant
      for (int t = 1; t < T; ++t) {
        INFO(inst.name << " state " << s << " t " << t);
        REQUIRE(vi.actions[static_cast<std::size_t>(t)][s] == vi.actions[0][s]);
      }
      INFO(inst.name << " state " << s);
      REQUIRE(result.greedy(s) == vi.actions[0][s]);
    }
  }
}

TEST_CASE("rollouts: certain reach gives estimate one, never-reach zero") {
  // Noise-free grid: p_intended = 1 keeps every move deterministic.
  grid_spec g{4, 4, 1.0, 0.0};
  auto m = build_grid(g);
  auto formula = parse_stl("F[0,6]( G[0,1](x>2 & y>2) )");
  fmdp_env env(m, formula, 1.0, grid_cell_index(g, 0, 0), 50.0);

  policy northeast;
  northeast.default_action = act_ne;
  auto stats = estimate_satisfaction(northeast, env, formula, 200, rng_stream(9));
  CHECK(stats.successes == 200);
  CHECK(stats.p_hat == 1.0);
  CHECK(stats.ci_high == 1.0);
  CHECK(stats.fallback_rate() == 1.0);  // the empty policy always falls back

  policy loiter;
  loiter.default_action = act_stay;
  auto none = estimate_satisfaction(loiter, env, formula, 100, rng_stream(9));
  CHECK(none.successes == 0);
  CHECK(none.p_hat == 0.0);
}

TEST_CASE("rollout flag verdicts agree with the offline oracle per trial") {
  auto inst = tiny::patrol_pair();
  fmdp_env env(inst.m, inst.formula, inst.dt, inst.start, 50.0);
  auto result = train(env, inst.learn, 0);

  std::vector<trajectory> trajectories;
  std::vector<std::vector<int>> sat_streams;
  auto stats = estimate_satisfaction(result.greedy, env, inst.formula, 500,
                                     rng_stream(321), &trajectories, &sat_streams);
  REQUIRE(trajectories.size() == 500);
  const int warmup = env.warmup_steps();
  int agreed = 0;
  for (std::size_t i = 0; i < trajectories.size(); ++i) {
    const int oracle = eval_bool(inst.formula, trajectories[i], 0);
    // outer always: running sat must hold at every objective step
    int combined = 1;
    for (std::size_t t = static_cast<std::size_t>(warmup);
         t < sat_streams[i].size(); ++t)
      combined = std::min(combined, sat_streams[i][t]);
    REQUIRE(oracle == combined);
    ++agreed;
  }
  CHECK(agreed == 500);
  CHECK(stats.trials == 500);
}

TEST_CASE("estimate is reproducible and sensitive to the seed") {
  auto inst = tiny::noisy_line_reach();
  fmdp_env env(inst.m, inst.formula, inst.dt, inst.start, 50.0);
  auto result = train(env, inst.learn, 0);
  auto a = estimate_satisfaction(result.greedy, env, inst.formula, 300, rng_stream(1));
  auto b = estimate_satisfaction(result.greedy, env, inst.formula, 300, rng_stream(1));
  CHECK(a.successes == b.successes);
  CHECK(a.p_hat == b.p_hat);
}
