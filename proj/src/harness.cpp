#include "ifedit/harness.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <json.hpp>
#include <numbers>
#include <random>

#include "ifedit/error.hpp"
#include "ifedit/image_io.hpp"
#include "ifedit/tensor_io.hpp"

namespace ifedit {
namespace {

constexpr std::array<const char*, 3> kShapes = {"square", "circle", "triangle"};
constexpr std::array<const char*, 4> kDirections = {"right", "left", "up", "down"};
constexpr std::array<const char*, 4> kColors = {"red", "blue", "green", "yellow"};

bool inside(std::size_t shape, double dx, double dy, double r) {
  switch (shape) {
    case 0: return std::abs(dx) <= r && std::abs(dy) <= r;
    case 1: return dx * dx + dy * dy <= r * r;
    default: return dy <= r && dy >= -r && std::abs(dx) <= (dy + r) / 2.0;
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string step_stem(std::size_t step, double t) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "step%02zu_t%.4f", step, t);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
  return buf;
}

EditConfig local_coupled(EditConfig c) {
  c.backend.kind = BackendKind::Coupled;
  c.enhance = false;
  return c;
}

}  // namespace

std::string format_psnr(double db) { return std::isinf(db) ? "inf" : fixed(db, 2); }

SyntheticCase synthetic_case(std::uint64_t seed, std::size_t height, std::size_t width) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const double fx = 1.0 + 5.0 * unit(rng);
  const double fy = 1.0 + 5.0 * unit(rng);
  const std::array<double, 3> base{0.2 + 0.3 * unit(rng), 0.2 + 0.3 * unit(rng), 0.2 + 0.3 * unit(rng)};
  std::vector<float> rgb(height * width * 3);
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const double u = static_cast<double>(c) / static_cast<double>(width);
      const double v = static_cast<double>(r) / static_cast<double>(height);
      const double texture = 0.1 * std::sin(2.0 * std::numbers::pi * fx * u) * std::cos(2.0 * std::numbers::pi * fy * v);
      const double checker = ((r / 4 + c / 4) % 2 == 0) ? 0.04 : -0.04;
      for (std::size_t ch = 0; ch < 3; ++ch) rgb[(r * width + c) * 3 + ch] = static_cast<float>(base[ch] + texture + checker);
    }
  }

  const std::size_t shape_count = 1 + rng() % 2;
  std::size_t hero = 0;
  for (std::size_t s = 0; s < shape_count; ++s) {
    const std::size_t shape = rng() % kShapes.size();
    if (s == 0) hero = shape;
    const double cx = (0.25 + 0.5 * unit(rng)) * static_cast<double>(width);
    const double cy = (0.25 + 0.5 * unit(rng)) * static_cast<double>(height);
    const double radius = (0.08 + 0.1 * unit(rng)) * static_cast<double>(std::min(height, width));
    const std::array<double, 3> color{0.6 + 0.4 * unit(rng), 0.6 * unit(rng), 0.4 + 0.6 * unit(rng)};
    for (std::size_t r = 0; r < height; ++r) {
      for (std::size_t c = 0; c < width; ++c) {
        if (!inside(shape, static_cast<double>(c) - cx, static_cast<double>(r) - cy, radius)) continue;
        for (std::size_t ch = 0; ch < 3; ++ch) rgb[(r * width + c) * 3 + ch] = static_cast<float>(color[ch]);
      }
    }
  }
  for (auto& v : rgb) v = std::clamp(v, 0.0f, 1.0f);

  std::string instruction = std::string("the ") + kShapes[hero];
  switch (rng() % 4) {
    case 0: instruction += std::string(" moves ") + kDirections[rng() % kDirections.size()]; break;
    case 1: instruction += " grows"; break;
    case 2: instruction += " rotates"; break;
    default: instruction += std::string(" turns ") + kColors[rng() % kColors.size()]; break;
  }
  return SyntheticCase{Image(height, width, std::move(rgb)), std::move(instruction), seed};
}

std::vector<SyntheticCase> synthetic_suite(std::size_t count, std::uint64_t seed, std::size_t height, std::size_t width) {
  std::vector<SyntheticCase> suite;
  suite.reserve(count);
  for (std::size_t i = 0; i < count; ++i) suite.push_back(synthetic_case(seed + 1000003ull * i, height, width));
  return suite;
}

std::string BenchReport::to_csv() const {
  std::string out = "trial,k,edit_token_steps,baseline_token_steps,speedup,total_token_steps,wall_ms,psnr_vs_full,hash\n";
  for (const auto& r : rows) {
    out += std::to_string(r.trial) + "," + std::to_string(r.stride) + "," + std::to_string(r.edit_token_steps) + "," +
           std::to_string(r.baseline_token_steps) + "," + fixed(r.speedup, 4) + "," + std::to_string(r.total_token_steps) +
           "," + fixed(r.wall_ms, 2) + "," + format_psnr(r.psnr_vs_full) + "," + r.hash + "\n";
  }
  return out;
}

std::string BenchReport::to_markdown() const {
  std::string out =
      "| trial | K | edit token-steps | baseline | speedup | total token-steps | wall (ms) | PSNR vs full (dB) | hash |\n"
      "|---:|---:|---:|---:|---:|---:|---:|---:|:---|\n";
  for (const auto& r : rows) {
    out += "| " + std::to_string(r.trial) + " | " + std::to_string(r.stride) + " | " + std::to_string(r.edit_token_steps) +
           " | " + std::to_string(r.baseline_token_steps) + " | " + fixed(r.speedup, 3) + "x | " +
           std::to_string(r.total_token_steps) + " | " + fixed(r.wall_ms, 1) + " | " + format_psnr(r.psnr_vs_full) + " | `" +
           r.hash + "` |\n";
  }
  return out;
}

BenchReport bench(const EditConfig& config, std::size_t trials, std::vector<std::size_t> strides) {
  if (trials == 0) throw ArgumentError("bench needs at least one trial");
  if (strides.empty()) strides.push_back(config.stride);
  const auto suite = synthetic_suite(trials, config.seed);

  EditConfig full_coupled = local_coupled(config);
  full_coupled.tld = false;
  const Pipeline full_pipeline(full_coupled);

  BenchReport report;
  for (std::size_t trial = 0; trial < suite.size(); ++trial) {
    const auto& scene = suite[trial];
    const Image full_frame = full_pipeline.edit(scene.image, scene.instruction).final_frame;
    for (std::size_t k : strides) {
      EditConfig c = config;
      c.stride = k;
      const EditResult run = Pipeline(c).edit(scene.image, scene.instruction);

      EditConfig coupled = local_coupled(c);
      const Image tld_frame = Pipeline(coupled).edit(scene.image, scene.instruction).final_frame;

      const TokenSteps predicted =
          predicted_token_steps(config.codec.latent_frames(c.frames), c.steps, c.tld_threshold, c.tld ? k : 1,
                                scene.image.height() / c.codec.spatial_factor, scene.image.width() / c.codec.spatial_factor);
      BenchRow row;
      row.trial = trial;
      row.stride = k;
      row.edit_token_steps = run.ledger.total_token_steps("edit");
      row.baseline_token_steps = predicted.baseline;
      row.total_token_steps = run.ledger.total_token_steps();
      row.speedup = static_cast<double>(row.baseline_token_steps) / static_cast<double>(row.edit_token_steps);
      row.wall_ms = run.wall_ms;
      row.psnr_vs_full = psnr(tld_frame, full_frame);
      row.hash = run.determinism_hash();
      report.rows.push_back(std::move(row));
    }
  }
  return report;
}

const AblationRow& AblationTable::row(std::string_view name) const {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  throw ArgumentError("no ablation row named " + std::string(name));
}

std::string AblationTable::to_csv() const {
  std::string out = "config,sharpness,token_steps,edit_token_steps,wall_ms,psnr_vs_full,scorer_calls,prompt_source\n";
  for (const auto& r : rows) {
    out += r.name + "," + fixed(r.sharpness, 6) + "," + fixed(r.token_steps, 1) + "," + fixed(r.edit_token_steps, 1) + "," +
           fixed(r.wall_ms, 2) + "," + format_psnr(r.psnr_vs_full) + "," + fixed(r.scorer_calls, 1) + "," +
           r.prompt_source + "\n";
  }
  return out;
}

std::string AblationTable::to_markdown() const {
  std::string out =
      "| config | sharpness | token-steps | edit token-steps | wall (ms) | PSNR vs full (dB) | scorer calls | prompt |\n"
      "|:---|---:|---:|---:|---:|---:|---:|:---|\n";
  for (const auto& r : rows) {
    out += "| " + r.name + " | " + fixed(r.sharpness, 5) + " | " + fixed(r.token_steps, 0) + " | " +
           fixed(r.edit_token_steps, 0) + " | " + fixed(r.wall_ms, 1) + " | " + format_psnr(r.psnr_vs_full) + " | " +
           fixed(r.scorer_calls, 1) + " | " + r.prompt_source + " |\n";
  }
  return out;
}

AblationTable ablate(const EditConfig& config, std::size_t cases) {
  if (cases == 0) throw ArgumentError("ablation needs at least one case");
  const auto suite = synthetic_suite(cases, config.seed);

  std::vector<std::pair<std::string, EditConfig>> grid;
  auto variant = [&](std::string name, auto&& tweak) {
    EditConfig c = config;
    tweak(c);
    grid.emplace_back(std::move(name), std::move(c));
  };
  variant("no-enhance", [](EditConfig& c) { c.enhance = false; });
  variant("no-refine", [](EditConfig& c) { c.refine = false; });
  for (std::size_t k = 1; k <= 4; ++k) {
    variant(k == 3 ? "K=3 (default)" : "K=" + std::to_string(k), [k](EditConfig& c) { c.stride = k; });
  }
  variant("scorer-filter", [](EditConfig& c) {
    c.refine = false;
    c.selection = FrameSelection::AllFrames;
  });

  AblationTable table;
  for (auto& [name, cfg] : grid) {
    EditConfig full = cfg;
    full.tld = false;
    const Pipeline pipeline(cfg);
    const Pipeline full_pipeline(full);

    AblationRow row;
    row.name = name;
    for (const auto& scene : suite) {
      const EditResult run = pipeline.edit(scene.image, scene.instruction);
      const EditResult reference = full_pipeline.edit(scene.image, scene.instruction);
      row.sharpness += laplacian_score(run.final_frame.clamped());
      row.token_steps += static_cast<double>(run.ledger.total_token_steps());
      row.edit_token_steps += static_cast<double>(run.ledger.total_token_steps("edit"));
      row.wall_ms += run.wall_ms;
      row.psnr_vs_full += psnr(run.final_frame, reference.final_frame);
      row.scorer_calls += static_cast<double>(run.scorer_calls);
      if (row.prompt_source.empty()) {
        row.prompt_source = std::string(to_string(run.prompt.source));
      } else if (row.prompt_source != to_string(run.prompt.source)) {
        row.prompt_source = "mixed";
      }
    }
    const double n = static_cast<double>(suite.size());
    row.sharpness /= n;
    row.token_steps /= n;
    row.edit_token_steps /= n;
    row.wall_ms /= n;
    row.psnr_vs_full /= n;
    row.scorer_calls /= n;
    table.rows.push_back(std::move(row));
  }
  return table;
}

EditResult run_with_artifacts(const Pipeline& pipeline, const Image& image, const std::string& instruction,
                              const std::filesystem::path& dir, const ArtifactOptions& options) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());

  const Codec& codec = pipeline.codec();
  const StepObserver observer = [&](const StepSnapshot& s) {
    if (s.phase != "edit") return;
    const std::string stem = step_stem(s.step, s.t);
    if (options.latent_dumps) write_ifed(dir / (stem + "_z.ifed"), to_dense(s.z_next));
    if (options.frame_grids) {
      const PixelVideo preview = codec.decode(s.x0_pred);
      write_png(dir / (stem + "_grid.png"), tile_frames(preview.frames(), codec.spec().temporal_factor));
    }
  };
  EditResult result = pipeline.edit(image, instruction, observer);

  if (options.frame_grids) {
    for (std::size_t i = 0; i < result.candidates.frames.size(); ++i) {
      char name[48];
      std::snprintf(name, sizeof(name), "clip_frame%02zu.png", result.candidates.indices[i]);
      write_png(dir / name, result.candidates.frames[i]);
    }
  }
  write_text(dir / "ledger.csv", result.ledger.to_csv());

  nlohmann::json report = nlohmann::json::parse(result.sharpness.to_json());
  report["candidate_indices"] = result.candidates.indices;
  report["provenance"] = {{"clip", result.provenance.clip}, {"index", result.provenance.index}};
  if (result.refinement) report["refine"] = nlohmann::json::parse(result.refinement->report.to_json());
  report["prompt"] = {{"source", to_string(result.prompt.source)},
                      {"original", result.prompt.original},
                      {"temporal_prompt", result.prompt.temporal_prompt},
                      {"reasoning", result.prompt.reasoning}};
  write_text(dir / "sharpness.json", report.dump(2) + "\n");
  return result;
}

}  // namespace ifedit
