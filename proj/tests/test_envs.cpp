#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "element/envs.hpp"
#include "element/error.hpp"

using namespace element;

TEST_CASE("maze parse examples") {
  auto a = Maze::parse("S.");
  CHECK(a.width() == 2);
  CHECK(a.height() == 1);
  CHECK(a.start() == Cell{0, 0});
  CHECK(a.max_steps() == 700);

  auto b = Maze::parse("S#\n..");
  CHECK(b.width() == 2);
  CHECK(b.height() == 2);
  CHECK(b.is_wall({0, 1}));
  CHECK_FALSE(b.is_wall({1, 0}));
  CHECK(b.reachable_count() == 3);

  auto c = Maze::parse("#.\r\n.S\n");
  CHECK(c.start() == Cell{1, 1});
  CHECK(Maze::parse(c.to_text()).to_text() == c.to_text());
}

TEST_CASE("maze parse errors carry positions") {
  auto expect = [](const std::string& text, std::size_t line, std::size_t col) {
    try {
      Maze::parse(text);
      FAIL("expected a parse error for " << text);
    } catch (const ParseError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() == col);
      CHECK(e.kind() == ErrorKind::parse_error);
    }
  };
  expect("SS", 1, 2);
  expect("S.\n.", 2, 2);
  expect("S.\n.x", 2, 2);
  CHECK_THROWS_AS(Maze::parse("..\n.."), ParseError);
  CHECK_THROWS_AS(Maze::parse(""), ParseError);
}

TEST_CASE("maze step") {
  auto m = Maze::parse("S.\n#.");
  CHECK(m.step({0, 0}, MazeAction::right) == Cell{0, 1});
  CHECK(m.step({0, 0}, MazeAction::down) == Cell{0, 0});
  CHECK(m.step({0, 0}, MazeAction::up) == Cell{0, 0});
  CHECK(m.step({0, 0}, MazeAction::left) == Cell{0, 0});
  CHECK(m.step({0, 1}, MazeAction::down) == Cell{1, 1});
  try {
    m.step({1, 0}, MazeAction::up);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
}

TEST_CASE("keys round-trip through cells") {
  auto m = Maze::parse("S..\n...");
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 3; ++c) CHECK(m.cell(m.key({r, c})) == Cell{r, c});
  CHECK(m.key({1, 2}) == 5);
}

TEST_CASE("random walks never leave the reachable set") {
  auto m = load_maze(ELEMENT_ASSET_DIR "/maze20.txt");
  CHECK(m.width() == 20);
  CHECK(m.height() == 20);
  const auto dist = m.distances_from_start();
  CHECK(dist[m.key(m.start())] == 0);
  std::size_t reachable = 0;
  for (int d : dist) reachable += d >= 0;
  CHECK(reachable == m.reachable_count());
  std::mt19937_64 rng(1);
  Cell at = m.start();
  for (int i = 0; i < 20000; ++i) {
    Cell next = m.step(at, static_cast<MazeAction>(rng() % 4));
    CHECK(std::abs(next.row - at.row) + std::abs(next.col - at.col) <= 1);
    at = next;
    REQUIRE(dist[m.key(at)] >= 0);
  }
  // Unreachable pockets stay out of the flood fill.
  auto pocket = Maze::parse("S#.\n.#.");
  CHECK(pocket.reachable_count() == 2);
  CHECK(pocket.distances_from_start()[pocket.key({0, 2})] == -1);
}

TEST_CASE("load_maze reports missing files") {
  try {
    load_maze("/nonexistent/maze.txt");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::io_error);
  }
}

TEST_CASE("point mass kinematics") {
  PointMassWorld w(PointMassConfig{}, 3);
  w.reset();
  const auto start = w.position();
  w.step({0.0, 0.0});
  CHECK(w.position() == start);
  double last_x = w.position()[0];
  for (int i = 0; i < 30; ++i) {
    w.step({1.0, 0.0});
    CHECK(w.position()[0] > last_x);
    CHECK(w.position()[1] == start[1]);
    last_x = w.position()[0];
  }
  CHECK(w.steps_taken() == 31);
}

TEST_CASE("point mass velocity update follows the stated rule") {
  PointMassConfig cfg;
  cfg.accel_gain = 0.25;
  cfg.dt = 0.5;
  cfg.reset_noise = 0.0;
  PointMassWorld w(cfg, 1);
  w.reset();
  w.step({1.0, -0.5});
  CHECK(w.velocity()[0] == doctest::Approx(0.25));
  CHECK(w.velocity()[1] == doctest::Approx(-0.125));
  CHECK(w.position()[0] == doctest::Approx(0.125));
  CHECK(w.position()[1] == doctest::Approx(-0.0625));
}

TEST_CASE("point mass speed bound and clamping") {
  PointMassWorld w(PointMassConfig{}, 9);
  w.reset();
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  std::uint64_t out_of_range = 0;
  for (int i = 0; i < 2000; ++i) {
    PointMassWorld::Vec2 a{u(rng), u(rng)};
    out_of_range += (std::fabs(a[0]) > 1.0) + (std::fabs(a[1]) > 1.0);
    w.step(a);
    CHECK(std::hypot(w.velocity()[0], w.velocity()[1]) <= 1.0 + 1e-12);
  }
  CHECK(w.clamped_actions() == out_of_range);
}

TEST_CASE("point mass reset stays near the origin and is seed-deterministic") {
  PointMassConfig cfg;
  cfg.reset_noise = 0.3;
  PointMassWorld a(cfg, 5), b(cfg, 5);
  for (int i = 0; i < 200; ++i) {
    auto p = a.reset();
    CHECK(std::hypot(p[0], p[1]) <= 0.3);
    CHECK(a.velocity() == PointMassWorld::Vec2{0.0, 0.0});
    CHECK(a.steps_taken() == 0);
    b.reset();
    for (int s = 0; s < 20; ++s) {
      PointMassWorld::Vec2 act{std::sin(i + s), std::cos(i * s)};
      a.step(act);
      b.step(act);
    }
    CHECK(a.position() == b.position());
    CHECK(a.velocity() == b.velocity());
  }
}

TEST_CASE("episode ends after the configured length") {
  PointMassConfig cfg;
  cfg.episode_length = 5;
  PointMassWorld w(cfg, 0);
  w.reset();
  for (int i = 0; i < 5; ++i) {
    CHECK_FALSE(w.episode_done());
    w.step({0.1, 0.1});
  }
  CHECK(w.episode_done());
}

TEST_CASE("point mass config validation") {
  PointMassConfig cfg;
  cfg.max_speed = 0.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.episode_length = 0;
  CHECK_THROWS_AS(cfg.validate(), Error);
  cfg = {};
  cfg.reset_noise = -1.0;
  CHECK_THROWS_AS(cfg.validate(), Error);
}

TEST_CASE("discretize examples") {
  Box box{-1.0, 1.0, -1.0, 1.0};
  CHECK(discretize(std::vector<double>{0.0, 0.0}, box, 100) == 5050);
  CHECK(discretize(std::vector<double>{-5.0, -5.0}, box, 100) == 0);
  CHECK(discretize(std::vector<double>{5.0, 5.0}, box, 100) == 9999);
  CHECK(discretize(std::vector<double>{0.3, -0.7}, box, 1) == 0);
  // Row from y, column from x.
  CHECK(discretize(std::vector<double>{0.99, -0.99}, box, 10) == 9);
  try {
    discretize(std::vector<double>{0.0, 0.0}, Box{1.0, 1.0, 0.0, 1.0}, 10);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::invalid_argument);
  }
  CHECK_THROWS_AS(discretize(std::vector<double>{0.0, 0.0}, box, 0), Error);
}
