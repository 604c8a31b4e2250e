#include <catch2/catch_amalgamated.hpp>

#include "stlq/parser.hpp"
#include "stlq/rng.hpp"
#include "stlq/semantics.hpp"
#include "support/nested_oracle.hpp"

using namespace stlq;

namespace {

trajectory traj1d(std::vector<double> values, double dt = 1.0) {
  trajectory t;
  t.dt = dt;
  for (double v : values) t.samples.push_back({v});
  return t;
}

}  // namespace

TEST_CASE("a signal alternating between both regions satisfies the patrol") {
  auto phi = parse_stl("G[0,7]( F[0,3](s0>5 & s0<6) & F[0,3](s0>1 & s0<2) )");
  // Regions A = (5,6) and B = (1,2) are each visited inside every window
  // [t, t+3] of the mission: alternate between them every step.
  trajectory good = traj1d({5.5, 1.5, 5.5, 1.5, 5.5, 1.5, 5.5, 1.5, 5.5, 1.5, 5.5});
  REQUIRE(good.size() == 11);  // hrz = 10 needs samples s_0..s_10
  CHECK(eval_bool(phi, good, 0) == 1);

  // Loitering at A for four steps starves region B inside that window.
  trajectory bad = traj1d({5.5, 5.5, 5.5, 5.5, 1.5, 5.5, 1.5, 5.5, 1.5, 5.5, 1.5});
  CHECK(eval_bool(phi, bad, 0) == 0);
}

TEST_CASE("an eventually over a never-true predicate is false") {
  auto sub = subformulae(parse_stl("G[0,7]( F[0,3](s0>5) )"))[0];
  trajectory zeros = traj1d({0, 0, 0, 0, 0, 0, 0, 0});
  CHECK(eval_bool(sub, zeros, 0) == 0);
  CHECK(eval_bool(sub, zeros, 4) == 0);
}

TEST_CASE("too few samples raises instead of truncating") {
  auto phi = parse_stl("F[0,6]( G[0,1](x>4 & y>4) )");
  trajectory short_traj;
  short_traj.dt = 1.0;
  for (int i = 0; i < 7; ++i) short_traj.samples.push_back({5.0, 5.0});
  // hrz = 7 needs 8 samples even though 7 would already witness the F.
  CHECK_THROWS_AS(eval_bool(phi, short_traj, 0), eval_error);
  short_traj.samples.push_back({5.0, 5.0});
  CHECK(eval_bool(phi, short_traj, 0) == 1);
  CHECK_THROWS_AS(eval_bool(phi, short_traj, 1), eval_error);
}

TEST_CASE("predicates check the signal dimension") {
  auto phi = parse_stl("F[0,1]( F[0,0](s3>0) )");
  trajectory t = traj1d({1, 1});
  CHECK_THROWS_AS(eval_bool(phi, t, 0), eval_error);
}

TEST_CASE("fractional sampling periods resolve windows by ceiling") {
  auto sub = subformulae(parse_stl("G[0,1]( F[0,1](s0>0) )"))[0];
  CHECK(sub_formula_tau(sub, 0.5) == 3);   // window [0,1] at dt=0.5: 3 samples
  CHECK(sub_formula_tau(sub, 0.4) == 4);   // ceil(2.5) = 3 steps
  trajectory t = traj1d({0, 0, 1}, 0.5);
  CHECK(eval_bool(sub, t, 0) == 1);
  trajectory t2 = traj1d({0, 0, 1}, 1.0);
  CHECK(eval_bool(sub, t2, 0) == 0);  // third sample now outside [0,1]
}

TEST_CASE("duality: F[0,b] p equals the negation of G[0,b] !p") {
  rng_stream rng(7);
  for (int trial = 0; trial < 2000; ++trial) {
    const double b = static_cast<double>(rng.next_below(4));
    const double threshold = static_cast<double>(rng.next_below(8));
    const bool gt = rng.next_below(2) == 1;

    sub_formula f_side;
    f_side.op = temporal_op::eventually;
    f_side.window_end = b;
    f_side.body = make_pred(0, gt ? cmp_op::greater : cmp_op::less, threshold);

    sub_formula g_side;
    g_side.op = temporal_op::always;
    g_side.window_end = b;
    g_side.body = make_not(f_side.body);

    std::vector<double> values;
    for (int i = 0; i < 9; ++i)
      values.push_back(static_cast<double>(rng.next_below(10)) - 0.5);
    trajectory traj = traj1d(values);

    for (int t = 0; t + static_cast<int>(b) < 9; ++t)
      CHECK(eval_bool(f_side, traj, t) == 1 - eval_bool(g_side, traj, t));
  }
}

namespace {

stl_formula random_small_formula(rng_stream& rng) {
  auto pred_text = [&](int depth) {
    std::string out;
    auto self = [&](auto&& rec, int d) -> std::string {
      if (d == 0 || rng.next_below(3) == 0)
        return "s" + std::to_string(rng.next_below(2)) +
               (rng.next_below(2) ? ">" : "<") +
               std::to_string(rng.next_below(9));
      if (rng.next_below(4) == 0) return "!(" + rec(rec, d - 1) + ")";
      return "(" + rec(rec, d - 1) + (rng.next_below(2) ? " & " : " | ") +
             rec(rec, d - 1) + ")";
    };
    return self(self, depth);
  };
  auto sub_text = [&] {
    return std::string(rng.next_below(2) ? "F" : "G") + "[0," +
           std::to_string(rng.next_below(4)) + "](" + pred_text(2) + ")";
  };
  std::string inner = sub_text();
  const auto extra = rng.next_below(3);
  for (std::uint64_t i = 0; i < extra; ++i)
    inner += (rng.next_below(2) ? " & " : " | ") + sub_text();
  std::string text = std::string(rng.next_below(2) ? "F" : "G") + "[0," +
                     std::to_string(1 + rng.next_below(5)) + "](" + inner + ")";
  return parse_stl(text);
}

}  // namespace

TEST_CASE("recursive evaluation agrees with the nested min/max expansion") {
  rng_stream rng(20240818);
  int evaluated = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto f = random_small_formula(rng);
    trajectory traj;
    traj.dt = 1.0;
    for (int i = 0; i < 11; ++i)
      traj.samples.push_back({static_cast<double>(rng.next_below(9)) + 0.5,
                              static_cast<double>(rng.next_below(9)) + 0.5});
    const int need = window_steps(horizon(f), 1.0);
    for (int t = 0; t + need < 11; ++t) {
      REQUIRE(eval_bool(f, traj, t) == oracle::nested_formula(f, traj, t));
      ++evaluated;
    }
  }
  CHECK(evaluated > 1000);
}
