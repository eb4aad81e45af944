#include <doctest.h>

#include <json.hpp>

#include "ifedit/error.hpp"
#include "ifedit/scpr.hpp"
#include "oracles.hpp"
#include "test_support.hpp"

using namespace ifedit;
using namespace ifedit::testing;

namespace {

// Pixel values on a 1/256 grid so adding a small dyadic offset stays exact in float.
Image quantized_image(std::mt19937_64& rng, std::size_t h, std::size_t w) {
  std::vector<float> rgb(h * w * 3);
  for (auto& v : rgb) v = static_cast<float>(rng() % 192) / 256.0f;
  return Image(h, w, std::move(rgb));
}

Image shifted(const Image& x, float c) {
  std::vector<float> rgb(x.pixels().begin(), x.pixels().end());
  for (auto& v : rgb) v += c;
  return Image(x.height(), x.width(), std::move(rgb));
}

Image scaled(const Image& x, float a) {
  std::vector<float> rgb(x.pixels().begin(), x.pixels().end());
  for (auto& v : rgb) v *= a;
  return Image(x.height(), x.width(), std::move(rgb));
}

}  // namespace

TEST_CASE("laplacian_score basics") {
  CHECK(laplacian_score(Image::filled(7, 5, 0.3f)) == 0.0);

  std::vector<float> rgb(9 * 3, 0.0f);
  for (int ch = 0; ch < 3; ++ch) rgb[4 * 3 + ch] = 1.0f;
  const Image impulse(3, 3, rgb);
  CHECK(brute_force_laplacian(impulse) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));
  CHECK(laplacian_score(impulse) == doctest::Approx(8.0 / 9.0).epsilon(1e-12));

  CHECK(laplacian_score(Image::filled(1, 1, 0.7f)) == 0.0);
}

TEST_CASE("laplacian_score matches the brute-force oracle") {
  std::mt19937_64 rng(50);
  for (int trial = 0; trial < 50; ++trial) {
    const auto img = random_image(rng, 1 + rng() % 17, 1 + rng() % 17);
    CHECK(std::abs(laplacian_score(img) - brute_force_laplacian(img)) <= 1e-12);
  }
}

TEST_CASE("blurring lowers the score") {
  std::mt19937_64 rng(51);
  int lower = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const auto img = random_image(rng, 24, 24);
    if (laplacian_score(box_blur5(img)) < laplacian_score(img)) ++lower;
  }
  CHECK(lower == 100);
}

TEST_CASE("score is shift invariant and scale equivariant") {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    const auto img = quantized_image(rng, 16, 12);
    const double base = laplacian_score(img);
    CHECK(std::abs(laplacian_score(shifted(img, 0.25f)) - base) <= 1e-9);
    CHECK(laplacian_score(scaled(img, 2.0f)) == doctest::Approx(2.0 * base).epsilon(1e-12));
    CHECK(laplacian_score(scaled(img, 0.5f)) == doctest::Approx(0.5 * base).epsilon(1e-12));
  }
}

TEST_CASE("selection") {
  CHECK(select_by_scores({0.1, 0.5, 0.3}).selected == 1);
  CHECK(select_by_scores({0.2, 0.2}).selected == 0);
  CHECK(select_by_scores({0.2, 0.7, 0.7, 0.1}).selected == 1);
  CHECK(select_by_scores({0.0}).selected == 0);
  CHECK_THROWS_AS(select_by_scores({}), ArgumentError);

  const auto report = select_by_scores({0.1, 0.5, 0.3});
  CHECK(report.selected_score == 0.5);
  const auto doc = nlohmann::json::parse(report.to_json());
  CHECK(doc["selected"] == 1);
  CHECK(doc["scores"].size() == 3);

  SUBCASE("agrees with an exhaustive scan, ties included") {
    std::mt19937_64 rng(53);
    for (int trial = 0; trial < 500; ++trial) {
      std::vector<double> scores(1 + rng() % 10);
      for (auto& s : scores) s = static_cast<double>(rng() % 4);  // plenty of ties
      CHECK(select_by_scores(scores).selected == exhaustive_argmax(scores));
    }
  }

  SUBCASE("select_sharpest uses the given scorer") {
    std::vector<Image> frames{Image::filled(2, 2, 0.1f), Image::filled(2, 2, 0.9f), Image::filled(2, 2, 0.5f)};
    const auto r = select_sharpest(frames, [](const Image& f) { return static_cast<double>(f.at(0, 0, 0)); });
    CHECK(r.selected == 1);
  }
}

TEST_CASE("candidate_frames") {
  auto video_of = [](std::size_t n) {
    std::vector<Image> frames;
    for (std::size_t i = 0; i < n; ++i) frames.push_back(Image::filled(1, 1, static_cast<float>(i) / 64.0f));
    return PixelVideo(frames);
  };
  auto c = candidate_frames(video_of(33), 4);
  CHECK(c.indices == std::vector<std::size_t>{29, 30, 31, 32});
  CHECK(c.frames[0] == video_of(33)[29]);
  CHECK(candidate_frames(video_of(1), 4).indices == std::vector<std::size_t>{0});
  CHECK(candidate_frames(video_of(9), 2).indices == std::vector<std::size_t>{7, 8});
  CHECK_THROWS_AS(candidate_frames(video_of(3), 4), ShapeError);
}

TEST_CASE("refine") {
  std::mt19937_64 rng(54);
  const auto x_star = random_image(rng, 8, 8);

  SUBCASE("keeps the sharpest frame of the generated clip") {
    std::vector<std::string> prompts;
    const ClipGenerator gen = [&](const Image& image, std::string_view prompt, std::size_t frames, std::size_t) {
      prompts.emplace_back(prompt);
      std::vector<Image> clip;
      for (std::size_t i = 0; i < frames; ++i) clip.push_back(i == 5 ? image : box_blur5(image));
      return PixelVideo(clip);
    };
    const auto out = refine(x_star, RefineConfig{}, gen);
    CHECK(out.clip_index == 5);
    CHECK(out.frame == x_star);
    CHECK(out.report.scores.size() == 9);
    REQUIRE(prompts.size() == 1);
    CHECK(prompts[0] == "A perfectly still video that enhances image clarity and fine details");
  }

  SUBCASE("a static generator is a fixed point") {
    const ClipGenerator still = [](const Image& image, std::string_view, std::size_t frames, std::size_t) {
      return PixelVideo(std::vector<Image>(frames, image));
    };
    const auto out = refine(x_star, RefineConfig{}, still);
    CHECK(out.frame == x_star);
    CHECK(out.clip_index == 0);
  }

  SUBCASE("invalid configurations") {
    const ClipGenerator never = [](const Image&, std::string_view, std::size_t, std::size_t) -> PixelVideo {
      FAIL("generator must not run");
      throw std::logic_error("unreachable");
    };
    RefineConfig cfg;
    cfg.steps = 0;
    CHECK_THROWS_AS(refine(x_star, cfg, never), ArgumentError);
    cfg = RefineConfig{};
    cfg.frames = 0;
    CHECK_THROWS_AS(refine(x_star, cfg, never), ArgumentError);
  }
}
