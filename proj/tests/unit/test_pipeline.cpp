#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "ifedit/error.hpp"
#include "ifedit/harness.hpp"
#include "ifedit/image_io.hpp"
#include "ifedit/pipeline.hpp"
#include "ifedit/tensor_io.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace ifedit;
using namespace ifedit::testing;

namespace {

EditConfig quiet_config() {
  EditConfig c;
  c.vlm.reset();
  return c;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ifedit_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  return dir;
}

std::size_t count_files(const fs::path& dir, const std::string& suffix) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    const auto name = e.path().filename().string();
    if (name.size() >= suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) ++n;
  }
  return n;
}

class FailingBackend : public DenoiserBackend {
 public:
  VideoLatent predict(const DenoiserInput&) const override { throw TransportError("backend went away"); }
  std::string descriptor() const override { return "failing"; }
};

}  // namespace

TEST_CASE("conditioning is the encoded pseudo-video with a first-frame mask") {
  std::mt19937_64 rng(60);
  const auto image = random_image(rng, 16, 16);
  const Pipeline pipeline(quiet_config());
  const auto pack = pipeline.build_conditioning(image, 33);
  CHECK(pack.y.dims() == LatentDims{48, 9, 8, 8});
  CHECK(pack.m.slice_value(0) == 1.0f);
  for (std::size_t f = 1; f < 9; ++f) CHECK(pack.m.slice_value(f) == 0.0f);

  const auto video = pipeline.codec().decode(pack.y);
  CHECK(max_abs_diff(video[0], image) <= 1e-5f);
  for (std::size_t i = 1; i < video.size(); ++i) CHECK(max_abs_diff(video[i], Image::filled(16, 16, 0.0f)) <= 1e-5f);

  CHECK_THROWS_AS(pipeline.build_conditioning(image, 32), ShapeError);
  CHECK_THROWS_AS(pipeline.build_conditioning(random_image(rng, 15, 16), 33), ShapeError);
}

TEST_CASE("oracle backend reproduces the input") {
  std::mt19937_64 rng(61);
  const auto image = random_image(rng, 16, 16);
  EditConfig c = quiet_config();
  c.backend.tau = 0.0;
  c.backend.identity_motion = true;
  for (bool tld : {true, false}) {
    for (bool refine : {true, false}) {
      c.tld = tld;
      c.refine = refine;
      const auto r = Pipeline(c).edit(image, "keep everything");
      CHECK(max_abs_diff(r.final_frame, image) <= 1e-4f);
    }
  }
}

TEST_CASE("determinism and TLD equivalences") {
  std::mt19937_64 rng(62);
  const auto image = random_image(rng, 16, 16);
  const EditConfig c = quiet_config();
  const auto a = Pipeline(c).edit(image, "the circle grows");
  const auto b = Pipeline(c).edit(image, "the circle grows");
  CHECK(a.final_frame == b.final_frame);
  CHECK(a.final_latent == b.final_latent);
  CHECK(a.determinism_hash() == b.determinism_hash());

  EditConfig other_seed = c;
  other_seed.seed += 1;
  CHECK_FALSE(Pipeline(other_seed).edit(image, "the circle grows").final_frame == a.final_frame);

  EditConfig k1 = c;
  k1.stride = 1;
  EditConfig off = c;
  off.tld = false;
  const auto r1 = Pipeline(k1).edit(image, "the circle grows");
  const auto r0 = Pipeline(off).edit(image, "the circle grows");
  CHECK(r1.final_frame == r0.final_frame);
  CHECK(r1.final_latent == r0.final_latent);

  // Slice-independent backend: dropping slices leaves the surviving ones untouched.
  CHECK(a.final_latent == temporal_select(r0.final_latent, a.latent_frames));
  CHECK(a.candidates.frames == r0.candidates.frames);
  EditConfig edit_only = c;
  edit_only.refine = false;
  EditConfig edit_only_full = edit_only;
  edit_only_full.tld = false;
  CHECK(Pipeline(edit_only).edit(image, "the circle grows").final_frame ==
        Pipeline(edit_only_full).edit(image, "the circle grows").final_frame);
}

TEST_CASE("ledger of the default run") {
  std::mt19937_64 rng(63);
  const auto image = random_image(rng, 16, 16);
  const auto r = Pipeline(quiet_config()).edit(image, "the square moves right");
  const auto records = r.ledger.records();
  REQUIRE(records.size() == 8 + 4);

  const std::uint64_t sites = 64;
  CHECK(r.ledger.total_token_steps("edit") == 37 * sites);
  CHECK(r.ledger.total_token_steps("edit") == predicted_token_steps(9, 8, 0.9, 3, 8, 8).reduced);
  CHECK(records[0].frames == 9);
  for (std::size_t i = 1; i < 8; ++i) CHECK(records[i].frames == 4);

  CHECK(records[0].expert == ExpertPhase::HighNoise);
  for (std::size_t i = 1; i < 8; ++i) CHECK(records[i].expert == ExpertPhase::LowNoise);

  // Refinement: 9 frames -> 3 latent frames, 4 steps, dropout from the first low-noise step.
  for (std::size_t i = 8; i < 12; ++i) {
    CHECK(records[i].phase == "refine");
    CHECK(records[i].step == i);
  }
  CHECK(records[8].frames == 3);
  CHECK(records[9].frames == 2);

  CHECK(r.provenance.clip == "refine");
  // The dropped clip decodes to 1 + 3 * 4 frames; refinement keeps 2 of 3 latents.
  CHECK(r.scorer_calls == 4 + 5);
  CHECK(r.candidates.indices == std::vector<std::size_t>{9, 10, 11, 12});
}

TEST_CASE("scorer-filter selection scores every frame") {
  std::mt19937_64 rng(64);
  EditConfig c = quiet_config();
  c.refine = false;
  c.selection = FrameSelection::AllFrames;
  const auto r = Pipeline(c).edit(random_image(rng, 16, 16), "the circle turns red");
  CHECK(r.scorer_calls == 13);
  c.tld = false;
  CHECK(Pipeline(c).edit(random_image(rng, 16, 16), "the circle turns red").scorer_calls == 33);
  CHECK(r.provenance.clip == "edit");
}

TEST_CASE("errors carry the failing stage") {
  std::mt19937_64 rng(65);
  const auto image = random_image(rng, 16, 16);
  const Pipeline pipeline(quiet_config(), std::make_shared<FailingBackend>());
  try {
    pipeline.edit(image, "x");
    FAIL("expected a StageError");
  } catch (const StageError& e) {
    CHECK(e.phase() == "denoise");
    CHECK(e.kind() == ErrorKind::Transport);
  }

  const Pipeline ok(quiet_config());
  CHECK_THROWS_AS(ok.edit(image, ""), StageError);
  CHECK_THROWS_AS(ok.edit(Image::filled(16, 16, 1.5f), "x"), StageError);
}

TEST_CASE("config JSON") {
  EditConfig c = quiet_config();
  c.stride = 2;
  c.backend.kind = BackendKind::Coupled;
  c.backend.lambda = 0.4;
  c.selection = FrameSelection::AllFrames;
  const auto back = config_from_json(config_to_json(c));
  CHECK(config_to_json(back) == config_to_json(c));
  CHECK(back.stride == 2);
  CHECK(back.backend.kind == BackendKind::Coupled);

  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"strides", 3}}), doctest::Contains("strides"), ConfigError);
  CHECK_THROWS_WITH_AS(config_from_json(nlohmann::json{{"backend", {{"sigma", 1}}}}), doctest::Contains("backend.sigma"),
                       ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"k", "three"}}), ConfigError);
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"backend", {{"kind", "gpu"}}}}), ConfigError);

  EditConfig bad = quiet_config();
  bad.frames = 32;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quiet_config();
  bad.switch_t = 1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = quiet_config();
  bad.backend.kind = BackendKind::Remote;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("psnr") {
  const auto a = Image::filled(4, 4, 0.5f);
  CHECK(std::isinf(psnr(a, a)));
  CHECK(psnr(a, Image::filled(4, 4, 0.6f)) == doctest::Approx(20.0).epsilon(1e-5));
  CHECK_THROWS_AS(psnr(a, Image::filled(4, 5, 0.5f)), ShapeError);
}

TEST_CASE("bench and ablate") {
  EditConfig c = quiet_config();
  const auto report = bench(c, 1, {1, 3});
  REQUIRE(report.rows.size() == 2);
  CHECK(report.rows[1].speedup == doctest::Approx(72.0 / 37.0));
  CHECK(report.rows[0].speedup == doctest::Approx(1.0));
  CHECK(report.rows[1].baseline_token_steps == 72u * 32u * 32u);
  CHECK(report.to_csv().rfind("trial,k,", 0) == 0);

  const auto table = ablate(c, 1);
  CHECK(table.rows.size() == 7);
  CHECK(table.row("K=1").edit_token_steps > table.row("K=2").edit_token_steps);
  CHECK(table.row("K=2").edit_token_steps > table.row("K=3 (default)").edit_token_steps);
  CHECK(table.row("K=3 (default)").edit_token_steps >= table.row("K=4").edit_token_steps);
  CHECK(table.row("no-refine").token_steps < table.row("K=3 (default)").token_steps);
  CHECK(table.row("no-enhance").prompt_source == "bypass");
  CHECK(table.row("scorer-filter").scorer_calls == 13.0);
  CHECK_THROWS_AS(table.row("missing"), ArgumentError);
}

TEST_CASE("synthetic scenes are seeded") {
  const auto a = synthetic_case(7);
  const auto b = synthetic_case(7);
  CHECK(a.image == b.image);
  CHECK(a.instruction == b.instruction);
  CHECK_FALSE(synthetic_case(8).image == a.image);
  a.image.require_unit_range();
}

TEST_CASE("artifacts") {
  const auto scene = synthetic_case(3, 16, 16);
  const Pipeline pipeline(quiet_config());

  SUBCASE("full dumps") {
    const auto dir = scratch_dir("artifacts");
    const auto r = run_with_artifacts(pipeline, scene.image, scene.instruction, dir, {true, true});
    CHECK(count_files(dir, "_z.ifed") == 8);
    CHECK(count_files(dir, "_grid.png") == 8);
    CHECK(fs::exists(dir / "step00_t1.0000_z.ifed"));
    CHECK(fs::exists(dir / "step07_t0.1250_grid.png"));
    CHECK(count_files(dir, ".png") == 8 + 4);
    CHECK(fs::exists(dir / "ledger.csv"));

    // The last dump is the final latent.
    CHECK(latent_from_dense(read_ifed(dir / "step07_t0.1250_z.ifed")) == r.final_latent);
    const auto first = read_ifed(dir / "step00_t1.0000_z.ifed");
    CHECK(first.dims == std::vector<std::uint32_t>{48, 9, 8, 8});

    std::ifstream in(dir / "sharpness.json");
    const auto doc = nlohmann::json::parse(in);
    CHECK(doc["selected"] == r.sharpness.selected);
    CHECK(doc["candidate_indices"].size() == 4);
    CHECK(doc["provenance"]["clip"] == "refine");
    const auto grid = read_png(dir / "step03_t0.6250_grid.png");
    CHECK(grid.width() == 4 * 16);
    fs::remove_all(dir);
  }

  SUBCASE("no dumps") {
    const auto dir = scratch_dir("nodumps");
    run_with_artifacts(pipeline, scene.image, scene.instruction, dir, {false, false});
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir)) ++n;
    CHECK(n == 2);
    fs::remove_all(dir);
  }
}

#ifdef IFEDIT_CLI_PATH
TEST_CASE("CLI") {
  const std::string cli = IFEDIT_CLI_PATH;
  const auto dir = scratch_dir("cli");
  fs::create_directories(dir);
  const auto scene = synthetic_case(5, 16, 16);
  write_png(dir / "in.png", scene.image);
  auto run = [&](const std::string& args) {
    const std::string cmd = "IFEDIT_QUIET=1 " + cli + " " + args + " > " + (dir / "stdout.txt").string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };

  CHECK(run("edit --image " + (dir / "in.png").string() + " --instruction 'the square moves right' --out " +
            (dir / "out.png").string()) == 0);
  CHECK(read_png(dir / "out.png").width() == 16);

  CHECK(run("edit --image " + (dir / "in.png").string() + " --instruction x --out " + (dir / "o.png").string() +
            " --frames 32") == 2);
  CHECK(run("edit --image " + (dir / "missing.png").string() + " --instruction x --out " + (dir / "o.png").string()) ==
        4);
  CHECK(run("edit --bogus") == 2);

  std::ofstream(dir / "bad.json") << R"({"strides": 2})";
  CHECK(run("edit --image " + (dir / "in.png").string() + " --instruction x --out " + (dir / "o.png").string() +
            " --config " + (dir / "bad.json").string()) == 2);

  CHECK(run("inspect --out " + (dir / "inspect").string() + " --no-dumps") == 0);
  CHECK(fs::exists(dir / "inspect" / "ledger.csv"));
  CHECK_FALSE(fs::exists(dir / "inspect" / "final.png"));
  fs::remove_all(dir);
}
#endif
