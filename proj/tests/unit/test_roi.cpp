#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include "alebk/roi/geometry.hpp"
#include "doctest.h"

using namespace alebk;
using namespace alebk::roi;

namespace {

// Eyes as hexagons of half-width 10 and half-height 4 around the given
// centres, every other point scattered over the image.
LandmarkSet face(Point left, Point right, std::mt19937_64& gen, std::size_t W = 200, std::size_t H = 160) {
  std::uniform_real_distribution<double> ux(0.0, static_cast<double>(W - 1)), uy(0.0, static_cast<double>(H - 1));
  LandmarkSet lm;
  lm.width = W;
  lm.height = H;
  for (auto& p : lm.points) p = {ux(gen), uy(gen)};
  const double ox[6] = {-10, -4, 4, 10, 4, -4}, oy[6] = {0, -4, -4, 0, 4, 4};
  for (std::size_t i = 0; i < 6; ++i) {
    lm.points[kLeftEyeBegin + i] = {left.x + ox[i], left.y + oy[i]};
    lm.points[kRightEyeBegin + i] = {right.x + ox[i], right.y + oy[i]};
  }
  return lm;
}

Tensor noise_image(std::size_t H, std::size_t W, std::size_t C, std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tensor t({H, W, C});
  for (auto& v : t.data()) v = u(gen);
  return t;
}

}  // namespace

TEST_SUITE("roi") {
  TEST_CASE("eye centres are the contour means") {
    std::mt19937_64 gen(1);
    const auto lm = face({60, 70}, {130, 75}, gen);
    const auto c = eye_centers(lm);
    CHECK(c.left.x == doctest::Approx(60).epsilon(1e-12));
    CHECK(c.left.y == doctest::Approx(70).epsilon(1e-12));
    CHECK(c.right.x == doctest::Approx(130).epsilon(1e-12));
    CHECK(c.right.y == doctest::Approx(75).epsilon(1e-12));
  }

  TEST_CASE("diagonal eyes rotate by minus 45 degrees") {
    LandmarkSet lm;
    lm.width = lm.height = 4;
    for (std::size_t i = 0; i < 6; ++i) {
      lm.points[kLeftEyeBegin + i] = {0, 0};
      lm.points[kRightEyeBegin + i] = {1, 1};
    }
    const auto a = align_face(Tensor({4, 4, 1}), lm);
    CHECK(a.angle == doctest::Approx(-std::numbers::pi / 4).epsilon(1e-12));
    CHECK(a.center == Point{0.5, 0.5});
  }

  TEST_CASE("rotation inverts and preserves distances") {
    std::mt19937_64 gen(2);
    std::uniform_real_distribution<double> u(-100, 100), ang(-3, 3);
    for (int i = 0; i < 200; ++i) {
      const Point p{u(gen), u(gen)}, q{u(gen), u(gen)}, c{u(gen), u(gen)};
      const double a = ang(gen);
      const auto back = rotate_point(rotate_point(p, c, a), c, -a);
      CHECK(std::abs(back.x - p.x) < 1e-9);
      CHECK(std::abs(back.y - p.y) < 1e-9);
      CHECK(std::abs(distance(rotate_point(p, c, a), rotate_point(q, c, a)) - distance(p, q)) < 1e-9);
    }
  }

  TEST_CASE("alignment levels the eyes, keeps geometry and is idempotent") {
    std::mt19937_64 gen(3);
    std::uniform_real_distribution<double> deg(-30, 30);
    const auto image = noise_image(160, 200, 1, gen);
    for (int trial = 0; trial < 20; ++trial) {
      const double a = deg(gen) * std::numbers::pi / 180.0;
      const Point mid{100, 80};
      const Point l = rotate_point({65, 80}, mid, a), r = rotate_point({135, 80}, mid, a);
      const auto lm = face(l, r, gen);
      const auto aligned = align_face(image, lm);
      const auto c = eye_centers(aligned.landmarks);
      CHECK(std::abs(c.right.y - c.left.y) < 1e-9);
      CHECK(c.right.x > c.left.x);
      for (std::size_t i = 0; i < kLandmarkCount; i += 7) {
        for (std::size_t j = i + 1; j < kLandmarkCount; j += 5) {
          CHECK(std::abs(distance(aligned.landmarks.points[i], aligned.landmarks.points[j]) -
                         distance(lm.points[i], lm.points[j])) < 1e-9);
        }
      }
      const auto again = align_face(aligned.image, aligned.landmarks);
      CHECK(std::abs(again.angle) < 1e-6);
    }
  }

  TEST_CASE("level eyes leave the image untouched") {
    std::mt19937_64 gen(4);
    const auto image = noise_image(30, 40, 3, gen);
    const auto lm = face({12, 15}, {28, 15}, gen, 40, 30);
    const auto a = align_face(image, lm);
    CHECK(a.angle == 0.0);
    CHECK(a.image.shape() == image.shape());
    CHECK(std::equal(a.image.data().begin(), a.image.data().end(), image.data().begin()));
  }

  TEST_CASE("coincident eye centres throw") {
    std::mt19937_64 gen(5);
    const auto lm = face({50, 50}, {50, 50}, gen);
    CHECK_THROWS_AS(align_face(Tensor({160, 200, 1}), lm), std::invalid_argument);
  }

  TEST_CASE("identity box resample reproduces the image") {
    std::mt19937_64 gen(6);
    const auto image = noise_image(17, 17, 3, gen);
    const auto out = resample_box(image, {-0.5, -0.5, 17.0}, 17);
    for (std::size_t i = 0; i < image.size(); ++i) CHECK(std::abs(out[i] - image[i]) < 1e-9);
  }

  TEST_CASE("constant image gives a constant crop") {
    const Tensor image({40, 40, 3}, 0.7);
    const auto out = resample_box(image, {5.25, 7.5, 20.0}, 50);
    CHECK(out.shape() == Shape{50, 50, 3});
    for (double v : out.data()) CHECK(std::abs(v - 0.7) < 1e-12);
  }

  TEST_CASE("2x2 checkerboard upsampled to 4x4 matches hand bilinear") {
    const Tensor image({2, 2, 1}, std::vector<double>{0, 1, 1, 0});
    const auto out = resize_bilinear(image, 4, 4);
    // Source coordinates are (k + 0.5) / 2 - 0.5, clamped into [0, 1].
    const double pos[4] = {0.0, 0.25, 0.75, 1.0};
    for (std::size_t y = 0; y < 4; ++y) {
      for (std::size_t x = 0; x < 4; ++x) {
        const double u = pos[x], v = pos[y];
        CHECK(std::abs(out.at(y, x, 0) - (u + v - 2 * u * v)) < 1e-12);
      }
    }
    CHECK(out.at(2, 1, 0) == doctest::Approx(0.625));
  }

  TEST_CASE("boxes entirely outside the image throw") {
    const Tensor image({10, 10, 1}, 0.5);
    CHECK_THROWS_AS(resample_box(image, {20, 0, 5}, 8), std::invalid_argument);
    CHECK_THROWS_AS(resample_box(image, {-12, -12, 5}, 8), std::invalid_argument);
    CHECK_THROWS_AS(resample_box(image, {0, 0, 0}, 8), std::invalid_argument);
    // Partly outside is fine and zero-filled.
    const auto part = resample_box(image, {-5.5, -0.5, 10}, 10);
    CHECK(part.at(5, 0, 0) == 0.0);
    CHECK(part.at(5, 9, 0) == doctest::Approx(0.5));
  }

  TEST_CASE("eye box and crops") {
    std::mt19937_64 gen(7);
    const auto lm = face({60, 80}, {140, 80}, gen);
    const auto box = eye_box(lm, kLeftEyeBegin, 0.4);
    CHECK(box.side == doctest::Approx(20 * 1.8));
    CHECK(box.x0 + box.side / 2 == doctest::Approx(60));
    CHECK(box.y0 + box.side / 2 == doctest::Approx(80));
    CHECK_THROWS(eye_box(lm, kLeftEyeBegin, -0.1));

    const auto aligned = align_face(Tensor({160, 200, 1}, 0.3), lm);
    const auto [l, r] = crop_and_resize(aligned);
    CHECK(l.shape() == Shape{50, 50, 3});
    CHECK(r.shape() == Shape{50, 50, 3});
    CHECK(l.at(25, 25, 2) == doctest::Approx(0.3));
  }

  TEST_CASE("landmark construction validates and clamps") {
    std::vector<Point> pts(68, Point{-5, 500});
    const auto lm = LandmarkSet::from_points(pts, 100, 80);
    CHECK(lm.points[0] == Point{0, 79});
    pts.pop_back();
    CHECK_THROWS(LandmarkSet::from_points(pts, 100, 80));
  }
}
