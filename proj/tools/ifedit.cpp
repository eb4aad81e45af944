// ifedit command line: edit, bench, ablate, inspect.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <string>

#include "ifedit/error.hpp"
#include "ifedit/harness.hpp"
#include "ifedit/image_io.hpp"
#include "ifedit/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ifedit;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitBackend = 3;
constexpr int kExitIo = 4;

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Transport:
    case ErrorKind::Protocol:
    case ErrorKind::Contract: return kExitBackend;
    case ErrorKind::Io: return kExitIo;
    default: return kExitConfig;
  }
}

// Flags shared by every subcommand; unset ones leave the config untouched.
struct Overrides {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> k;
  std::optional<double> tth;
  std::optional<double> switch_t;
  std::optional<std::size_t> frames;
  std::optional<std::size_t> steps;
  std::optional<std::string> backend;
  std::optional<double> tau;
  std::optional<double> lambda;
  std::optional<std::string> backend_url;
  std::optional<int> retries;
  std::optional<int> backoff_ms;
  bool identity_motion = false;
  bool no_tld = false;
  bool no_enhance = false;
  bool no_refine = false;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "JSON config file; flags override its values");
    app->add_option("--seed", seed, "RNG seed");
    app->add_option("--k", k, "temporal dropout stride K");
    app->add_option("--tth", tth, "dropout threshold T_th");
    app->add_option("--switch-t", switch_t, "expert switch timestep");
    app->add_option("--frames", frames, "pixel frames per clip (F = 1 mod q)");
    app->add_option("--steps", steps, "denoising steps");
    app->add_option("--backend", backend, "analytic | coupled | remote")->check(CLI::IsMember({"analytic", "coupled", "remote"}));
    app->add_option("--tau", tau, "analytic prior standard deviation");
    app->add_option("--lambda", lambda, "temporal coupling strength of the coupled backend");
    app->add_option("--backend-url", backend_url, "remote backend base URL (default $IFEDIT_BACKEND_URL)");
    app->add_option("--retries", retries, "remote retries after the first attempt");
    app->add_option("--backoff-ms", backoff_ms, "initial remote retry backoff");
    app->add_flag("--identity-motion", identity_motion, "toy backends keep the scene static");
    app->add_flag("--no-tld", no_tld, "disable temporal latent dropout");
    app->add_flag("--no-enhance", no_enhance, "pass the raw instruction to the model");
    app->add_flag("--no-refine", no_refine, "skip still-video post-refinement");
  }

  EditConfig resolve() const {
    EditConfig c;
    if (auto endpoint = backend_endpoint_from_env()) c.backend.remote = *endpoint;
    c.vlm = vlm_endpoint_from_env();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw ConfigError("cannot read config file " + config_path);
      nlohmann::json doc;
      try {
        in >> doc;
      } catch (const nlohmann::json::exception& e) {
        throw ConfigError(config_path + ": " + e.what());
      }
      c = config_from_json(doc, std::move(c));
    }
    if (seed) c.seed = *seed;
    if (k) c.stride = *k;
    if (tth) c.tld_threshold = *tth;
    if (switch_t) c.switch_t = *switch_t;
    if (frames) c.frames = *frames;
    if (steps) c.steps = *steps;
    if (backend) c.backend.kind = backend_kind_from_string(*backend);
    if (tau) c.backend.tau = *tau;
    if (lambda) c.backend.lambda = *lambda;
    if (backend_url) c.backend.remote.base_url = *backend_url;
    if (retries) c.backend.remote.retry.max_retries = *retries;
    if (backoff_ms) c.backend.remote.retry.initial_backoff_ms = *backoff_ms;
    if (identity_motion) c.backend.identity_motion = true;
    if (no_tld) c.tld = false;
    if (no_enhance) c.enhance = false;
    if (no_refine) c.refine = false;
    c.validate();
    return c;
  }
};

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << text;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

void print_summary(const EditResult& r) {
  std::cout << "prompt source: " << to_string(r.prompt.source) << "\n"
            << "token-steps: edit " << r.ledger.total_token_steps("edit") << ", total " << r.ledger.total_token_steps()
            << "\n"
            << "final frame: " << r.provenance.clip << " clip, index " << r.provenance.index << "\n"
            << "hash: " << r.determinism_hash() << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tuning-free image editing through an image-to-video denoising pipeline"};
  app.require_subcommand(1);

  Overrides edit_flags;
  std::string edit_image, edit_instruction, edit_out, edit_dump;
  auto* edit_cmd = app.add_subcommand("edit", "edit one image");
  edit_cmd->add_option("--image", edit_image, "input PNG")->required();
  edit_cmd->add_option("--instruction", edit_instruction, "editing instruction")->required();
  edit_cmd->add_option("--out", edit_out, "output PNG")->required();
  edit_cmd->add_option("--dump", edit_dump, "directory for per-step IFED dumps, ledger and sharpness report");
  edit_flags.attach(edit_cmd);

  Overrides bench_flags;
  std::size_t bench_trials = 1;
  std::string bench_out;
  bool bench_sweep = false;
  auto* bench_cmd = app.add_subcommand("bench", "token-step, timing and fidelity benchmark on synthetic scenes");
  bench_cmd->add_option("--trials", bench_trials, "number of synthetic scenes")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--out", bench_out, "report directory")->required();
  bench_cmd->add_flag("--sweep-k", bench_sweep, "run K in {1,2,3,4}");
  bench_flags.attach(bench_cmd);

  Overrides ablate_flags;
  std::size_t ablate_cases = 4;
  std::string ablate_out;
  auto* ablate_cmd = app.add_subcommand("ablate", "configuration ablation grid on synthetic scenes");
  ablate_cmd->add_option("--out", ablate_out, "report directory")->required();
  ablate_cmd->add_option("--cases", ablate_cases, "synthetic scenes per cell")->check(CLI::PositiveNumber);
  ablate_flags.attach(ablate_cmd);

  Overrides inspect_flags;
  std::string inspect_image, inspect_instruction, inspect_out;
  bool inspect_no_dumps = false;
  auto* inspect_cmd = app.add_subcommand("inspect", "write per-step frame grids and latent dumps");
  inspect_cmd->add_option("--image", inspect_image, "input PNG (default: a synthetic scene)");
  inspect_cmd->add_option("--instruction", inspect_instruction, "editing instruction");
  inspect_cmd->add_option("--out", inspect_out, "artifact directory")->required();
  inspect_cmd->add_flag("--no-dumps", inspect_no_dumps, "write only ledger.csv and sharpness.json");
  inspect_flags.attach(inspect_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*edit_cmd) {
      const EditConfig config = edit_flags.resolve();
      const Image image = read_png(edit_image);
      const Pipeline pipeline(config);
      EditResult result = edit_dump.empty()
                              ? pipeline.edit(image, edit_instruction)
                              : run_with_artifacts(pipeline, image, edit_instruction, edit_dump, {true, false});
      write_png(edit_out, result.final_frame);
      print_summary(result);
    } else if (*bench_cmd) {
      const EditConfig config = bench_flags.resolve();
      ensure_dir(bench_out);
      const BenchReport report = bench(config, bench_trials, bench_sweep ? std::vector<std::size_t>{1, 2, 3, 4}
                                                                         : std::vector<std::size_t>{});
      write_text(fs::path(bench_out) / "bench.csv", report.to_csv());
      write_text(fs::path(bench_out) / "bench.md", report.to_markdown());
      std::cout << report.to_markdown();
    } else if (*ablate_cmd) {
      const EditConfig config = ablate_flags.resolve();
      ensure_dir(ablate_out);
      const AblationTable table = ablate(config, ablate_cases);
      write_text(fs::path(ablate_out) / "ablation.csv", table.to_csv());
      write_text(fs::path(ablate_out) / "ablation.md", table.to_markdown());
      std::cout << table.to_markdown();
    } else if (*inspect_cmd) {
      const EditConfig config = inspect_flags.resolve();
      SyntheticCase scene = synthetic_case(config.seed);
      const Image image = inspect_image.empty() ? scene.image : read_png(inspect_image);
      const std::string instruction = inspect_instruction.empty() ? scene.instruction : inspect_instruction;
      const Pipeline pipeline(config);
      const ArtifactOptions options{!inspect_no_dumps, !inspect_no_dumps};
      const EditResult result = run_with_artifacts(pipeline, image, instruction, inspect_out, options);
      if (!inspect_no_dumps) write_png(fs::path(inspect_out) / "final.png", result.final_frame);
      print_summary(result);
    }
  } catch (const Error& e) {
    std::cerr << "ifedit: " << to_string(e.kind()) << " error: " << e.what() << "\n";
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "ifedit: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
