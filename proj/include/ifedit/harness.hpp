#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "ifedit/pipeline.hpp"

namespace ifedit {

// Seeded scene of geometric shapes over a textured background, paired with a
// templated instruction ("the square moves right", "the circle grows", ...).
struct SyntheticCase {
  Image image;
  std::string instruction;
  std::uint64_t seed = 0;
};

SyntheticCase synthetic_case(std::uint64_t seed, std::size_t height = 64, std::size_t width = 64);
std::vector<SyntheticCase> synthetic_suite(std::size_t count, std::uint64_t seed, std::size_t height = 64,
                                           std::size_t width = 64);

struct BenchRow {
  std::size_t trial = 0;
  std::size_t stride = 0;
  std::uint64_t edit_token_steps = 0;
  std::uint64_t baseline_token_steps = 0;
  std::uint64_t total_token_steps = 0;
  double speedup = 0.0;
  double wall_ms = 0.0;
  double psnr_vs_full = 0.0;  // coupled backend, TLD run vs full run
  std::string hash;
};

struct BenchReport {
  std::vector<BenchRow> rows;
  std::string to_csv() const;
  std::string to_markdown() const;
};

// `strides` empty means the configured K only.
BenchReport bench(const EditConfig& config, std::size_t trials, std::vector<std::size_t> strides = {});

struct AblationRow {
  std::string name;
  double sharpness = 0.0;               // mean laplacian_score of the final frame
  double token_steps = 0.0;             // mean per edit, refinement included
  double edit_token_steps = 0.0;        // mean per edit, edit pass only
  double wall_ms = 0.0;                 // mean per edit
  double psnr_vs_full = 0.0;            // mean over cases, against the same row with TLD off
  double scorer_calls = 0.0;            // mean frame-scorer invocations per edit
  std::string prompt_source;
};

struct AblationTable {
  std::vector<AblationRow> rows;
  const AblationRow& row(std::string_view name) const;
  std::string to_csv() const;
  std::string to_markdown() const;
};

// Rows: no-enhance, no-refine, K=1..4 (K=3 is the default pipeline), and a
// scorer-filter row that scores every decoded frame instead of refining.
AblationTable ablate(const EditConfig& config, std::size_t cases);

struct ArtifactOptions {
  bool latent_dumps = true;  // per-step IFED dumps of z
  bool frame_grids = true;   // per-step decoded x0 prediction grids and final clip frames
};

// Runs one edit and writes ledger.csv and sharpness.json into `dir`, plus the
// per-step artifacts selected by `options`. Names encode step index and t.
EditResult run_with_artifacts(const Pipeline& pipeline, const Image& image, const std::string& instruction,
                              const std::filesystem::path& dir, const ArtifactOptions& options);

std::string format_psnr(double db);

}  // namespace ifedit
