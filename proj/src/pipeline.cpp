#include "ifedit/pipeline.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <random>
#include <sstream>

#include "ifedit/encoding.hpp"
#include "ifedit/error.hpp"
#include "ifedit/tensor_io.hpp"

namespace ifedit {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

template <class Fn>
auto staged(std::string_view phase, Fn&& fn) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const Error& e) {
    throw StageError(std::string(phase), e);
  }
}

std::string selection_name(FrameSelection s) { return s == FrameSelection::LastLatent ? "last-latent" : "all-frames"; }

}  // namespace

std::string_view to_string(BackendKind kind) noexcept {
  switch (kind) {
    case BackendKind::Analytic: return "analytic";
    case BackendKind::Coupled: return "coupled";
    case BackendKind::Remote: return "remote";
  }
  return "unknown";
}

BackendKind backend_kind_from_string(std::string_view name) {
  if (name == "analytic") return BackendKind::Analytic;
  if (name == "coupled") return BackendKind::Coupled;
  if (name == "remote") return BackendKind::Remote;
  throw ConfigError("unknown backend '" + std::string(name) + "' (expected analytic, coupled or remote)");
}

void EditConfig::validate() const {
  const std::size_t q = codec.temporal_factor;
  if (q < 1 || codec.spatial_factor < 1) throw ConfigError("codec factors must be >= 1");
  if (frames < 1 || (frames - 1) % q != 0) {
    throw ConfigError("frames = " + std::to_string(frames) + " must satisfy (frames - 1) mod " + std::to_string(q) + " == 0");
  }
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (stride < 1) throw ConfigError("K must be >= 1");
  if (!(tld_threshold > 0.0 && tld_threshold <= 1.0)) throw ConfigError("TLD threshold must lie in (0, 1]");
  if (!(switch_t > 0.0 && switch_t < 1.0)) throw ConfigError("switch_t must lie in (0, 1)");
  if (!(backend.tau >= 0.0) || !std::isfinite(backend.tau)) throw ConfigError("tau must be finite and >= 0");
  if (!(backend.lambda >= 0.0 && backend.lambda < 1.0)) throw ConfigError("lambda must lie in [0, 1)");
  if (backend.kind == BackendKind::Remote && backend.remote.base_url.empty()) {
    throw ConfigError("remote backend needs a URL (backend.url or IFEDIT_BACKEND_URL)");
  }
  if (refine) {
    if (refine_config.steps < 1) throw ConfigError("refinement steps must be >= 1");
    if (refine_config.frames < 1 || (refine_config.frames - 1) % q != 0) {
      throw ConfigError("refinement frames = " + std::to_string(refine_config.frames) + " must satisfy (F - 1) mod " +
                        std::to_string(q) + " == 0");
    }
    if (refine_config.still_prompt.empty()) throw ConfigError("refinement prompt must be non-empty");
  }
}

EditConfig config_from_json(const nlohmann::json& doc, EditConfig base) {
  using nlohmann::json;
  if (!doc.is_object()) throw ConfigError("config must be a JSON object");
  auto check_keys = [](const json& obj, std::initializer_list<std::string_view> allowed, std::string_view where) {
    for (const auto& [key, _] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw ConfigError("unknown config key '" + std::string(where) + key + "'");
      }
    }
  };
  try {
    check_keys(doc,
               {"frames", "steps", "k", "t_th", "switch_t", "seed", "enhance", "refine", "tld", "selection", "codec",
                "backend", "refine_config", "vlm", "keep_step_latents"},
               "");
    EditConfig c = std::move(base);
    auto get = [&](const json& obj, const char* key, auto& field) {
      if (obj.contains(key)) field = obj.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    get(doc, "frames", c.frames);
    get(doc, "steps", c.steps);
    get(doc, "k", c.stride);
    get(doc, "t_th", c.tld_threshold);
    get(doc, "switch_t", c.switch_t);
    get(doc, "seed", c.seed);
    get(doc, "enhance", c.enhance);
    get(doc, "refine", c.refine);
    get(doc, "tld", c.tld);
    get(doc, "keep_step_latents", c.keep_step_latents);
    if (doc.contains("selection")) {
      const auto s = doc.at("selection").get<std::string>();
      if (s == "last-latent") c.selection = FrameSelection::LastLatent;
      else if (s == "all-frames") c.selection = FrameSelection::AllFrames;
      else throw ConfigError("selection must be last-latent or all-frames");
    }
    if (doc.contains("codec")) {
      const auto& o = doc.at("codec");
      check_keys(o, {"q", "p", "seed"}, "codec.");
      get(o, "q", c.codec.temporal_factor);
      get(o, "p", c.codec.spatial_factor);
      get(o, "seed", c.codec.basis_seed);
    }
    if (doc.contains("backend")) {
      const auto& o = doc.at("backend");
      check_keys(o, {"kind", "tau", "lambda", "identity_motion", "max_speed", "url", "timeout_ms", "retries", "backoff_ms"},
                 "backend.");
      if (o.contains("kind")) c.backend.kind = backend_kind_from_string(o.at("kind").get<std::string>());
      get(o, "tau", c.backend.tau);
      get(o, "lambda", c.backend.lambda);
      get(o, "identity_motion", c.backend.identity_motion);
      get(o, "max_speed", c.backend.max_speed);
      get(o, "url", c.backend.remote.base_url);
      get(o, "timeout_ms", c.backend.remote.timeout_ms);
      get(o, "retries", c.backend.remote.retry.max_retries);
      get(o, "backoff_ms", c.backend.remote.retry.initial_backoff_ms);
    }
    if (doc.contains("refine_config")) {
      const auto& o = doc.at("refine_config");
      check_keys(o, {"still_prompt", "frames", "steps"}, "refine_config.");
      get(o, "still_prompt", c.refine_config.still_prompt);
      get(o, "frames", c.refine_config.frames);
      get(o, "steps", c.refine_config.steps);
    }
    if (doc.contains("vlm")) {
      const auto& o = doc.at("vlm");
      check_keys(o, {"url", "model", "key", "timeout_ms", "system_prompt_file"}, "vlm.");
      VlmEndpoint vlm = c.vlm.value_or(VlmEndpoint{});
      get(o, "url", vlm.http.base_url);
      get(o, "model", vlm.model);
      get(o, "key", vlm.http.bearer_token);
      get(o, "timeout_ms", vlm.http.timeout_ms);
      if (o.contains("system_prompt_file")) {
        const auto path = o.at("system_prompt_file").get<std::string>();
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot read system prompt file " + path);
        std::ostringstream text;
        text << in.rdbuf();
        vlm.system_prompt = text.str();
      }
      c.vlm = vlm.http.base_url.empty() ? std::nullopt : std::optional<VlmEndpoint>(vlm);
    }
    return c;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad config value: ") + e.what());
  }
}

nlohmann::json config_to_json(const EditConfig& c) {
  nlohmann::json doc = {
      {"frames", c.frames},
      {"steps", c.steps},
      {"k", c.stride},
      {"t_th", c.tld_threshold},
      {"switch_t", c.switch_t},
      {"seed", c.seed},
      {"enhance", c.enhance},
      {"refine", c.refine},
      {"tld", c.tld},
      {"selection", selection_name(c.selection)},
      {"keep_step_latents", c.keep_step_latents},
      {"codec", {{"q", c.codec.temporal_factor}, {"p", c.codec.spatial_factor}, {"seed", c.codec.basis_seed}}},
      {"backend",
       {{"kind", to_string(c.backend.kind)},
        {"tau", c.backend.tau},
        {"lambda", c.backend.lambda},
        {"identity_motion", c.backend.identity_motion},
        {"max_speed", c.backend.max_speed},
        {"url", c.backend.remote.base_url},
        {"timeout_ms", c.backend.remote.timeout_ms},
        {"retries", c.backend.remote.retry.max_retries},
        {"backoff_ms", c.backend.remote.retry.initial_backoff_ms}}},
      {"refine_config",
       {{"still_prompt", c.refine_config.still_prompt}, {"frames", c.refine_config.frames}, {"steps", c.refine_config.steps}}},
  };
  if (c.vlm) doc["vlm"] = {{"url", c.vlm->http.base_url}, {"model", c.vlm->model}, {"timeout_ms", c.vlm->http.timeout_ms}};
  return doc;
}

std::string EditResult::determinism_hash() const {
  std::string bytes = encode_ifed(to_dense(final_latent));
  const auto px = final_frame.pixels();
  bytes.append(reinterpret_cast<const char*>(px.data()), px.size() * sizeof(float));
  return sha256_hex(bytes).substr(0, 16);
}

std::shared_ptr<const DenoiserBackend> make_backend(const BackendConfig& config, const CodecSpec& codec,
                                                    std::uint64_t seed) {
  const AnalyticSpec spec{config.tau, MotionProgram{config.identity_motion, seed, config.max_speed}};
  switch (config.kind) {
    case BackendKind::Analytic: return std::make_shared<AnalyticBackend>(Codec(codec), spec);
    case BackendKind::Coupled: return std::make_shared<CoupledBackend>(Codec(codec), spec, config.lambda);
    case BackendKind::Remote: return std::make_shared<RemoteBackend>(config.remote);
  }
  throw ConfigError("unknown backend kind");
}

Pipeline::Pipeline(EditConfig config, std::shared_ptr<const DenoiserBackend> backend)
    : config_((config.validate(), std::move(config))),
      codec_(config_.codec),
      moe_([&] {
        auto b = backend ? std::move(backend) : make_backend(config_.backend, config_.codec, config_.seed);
        return MoEDenoiser(b, b, config_.switch_t);
      }()) {}

ConditioningPack Pipeline::build_conditioning(const Image& image, std::size_t frames) const {
  config_.codec.validate(frames, image.height(), image.width());
  std::vector<Image> pseudo;
  pseudo.reserve(frames);
  pseudo.push_back(image);
  for (std::size_t i = 1; i < frames; ++i) pseudo.push_back(Image::filled(image.height(), image.width(), 0.0f));
  VideoLatent y = codec_.encode(PixelVideo(std::move(pseudo)));
  TemporalMask m = TemporalMask::first_observed(y.frames(), y.height(), y.width());
  return {std::move(y), std::move(m)};
}

GeneratedClip Pipeline::generate(const Image& image, std::string_view prompt, std::size_t frames, std::size_t steps,
                                 std::uint64_t seed, ComputeLedger& ledger, std::string_view phase,
                                 const StepObserver& observer) const {
  ConditioningPack cond = staged("conditioning", [&] { return build_conditioning(image, frames); });
  const PromptEmbedding embedding = staged("conditioning", [&] { return embed(prompt); });

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<float> noise(cond.y.size());
  for (auto& v : noise) v = static_cast<float>(normal(rng));

  std::vector<std::size_t> ids(cond.y.frames());
  for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = i;
  TldState state{VideoLatent(cond.y.dims(), std::move(noise)), std::move(cond.y), std::move(cond.m), std::move(ids),
                 DropoutPolicy{config_.stride, config_.tld_threshold, false}};

  const NoiseSchedule schedule = staged("schedule", [&] { return make_schedule(steps); });
  const std::size_t first_step = ledger.size();
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    const double t = schedule[i].t;
    const double t_next = schedule.next_t(i);
    if (config_.tld) state = staged("dropout", [&] { return maybe_apply(std::move(state), t); });

    DenoiserInput input{state.z, state.y, state.m, t, embedding, state.frames};
    MoEPrediction pred = staged("denoise", [&] {
      auto out = moe_.predict(input);
      if (out.x0.dims() != state.z.dims()) {
        throw ContractError("backend returned " + to_string(out.x0.dims()) + ", expected " + to_string(state.z.dims()));
      }
      return out;
    });
    state.z = staged("denoise", [&] { return euler_step(state.z, pred.x0, t, t_next); });

    const std::size_t f = state.z.frames();
    const std::size_t sites = state.z.dims().sites();
    ledger.append(StepRecord{first_step + i, t, pred.expert, f, sites, static_cast<std::uint64_t>(f) * sites,
                             std::string(phase)});
    if (observer) observer(StepSnapshot{phase, first_step + i, t, state.z, pred.x0, state.frames});
  }

  PixelVideo video = staged("decode", [&] { return codec_.decode(state.z); });
  return GeneratedClip{std::move(state.z), std::move(state.frames), std::move(video)};
}

EditResult Pipeline::edit(const Image& image, std::string_view instruction, const StepObserver& observer,
                          const FrameScorer& scorer) const {
  const auto started = std::chrono::steady_clock::now();
  staged("request", [&] {
    if (instruction.empty()) throw ArgumentError("instruction must be non-empty");
    image.require_unit_range();
    config_.codec.validate(config_.frames, image.height(), image.width());
    return 0;
  });

  std::size_t scorer_calls = 0;
  const FrameScorer counted = [&](const Image& frame) {
    ++scorer_calls;
    return scorer(frame);
  };

  EnhancedPrompt prompt = staged("enhance", [&] {
    return config_.enhance ? enhance(image, instruction, config_.vlm) : bypass_prompt(instruction);
  });

  ComputeLedger ledger;
  std::vector<VideoLatent> step_latents;
  const StepObserver record = [&](const StepSnapshot& s) {
    if (config_.keep_step_latents) step_latents.push_back(s.z_next);
    if (observer) observer(s);
  };
  GeneratedClip clip =
      generate(image, prompt.temporal_prompt, config_.frames, config_.steps, config_.seed, ledger, "edit", record);

  CandidateFrames candidates = staged("select", [&] {
    if (config_.selection == FrameSelection::LastLatent) return candidate_frames(clip.video, config_.codec.temporal_factor);
    CandidateFrames all;
    for (std::size_t i = 0; i < clip.video.size(); ++i) {
      all.indices.push_back(i);
      all.frames.push_back(clip.video[i]);
    }
    return all;
  });
  SharpnessReport sharpness = staged("select", [&] { return select_sharpest(candidates.frames, counted); });
  Image x_star = candidates.frames[sharpness.selected];

  EditResult result{x_star,
                    FrameProvenance{"edit", candidates.indices[sharpness.selected]},
                    std::move(candidates),
                    std::move(sharpness),
                    std::nullopt,
                    ComputeLedger{},
                    std::move(prompt),
                    std::move(clip.final_latent),
                    std::move(clip.latent_frames),
                    {},
                    0,
                    0.0};

  if (config_.refine) {
    const std::uint64_t refine_seed = splitmix64(config_.seed);
    const ClipGenerator generator = [&](const Image& img, std::string_view still, std::size_t frames, std::size_t steps) {
      return generate(img, still, frames, steps, refine_seed, ledger, "refine", record).video;
    };
    RefineOutcome outcome = staged("refine", [&] { return refine(x_star, config_.refine_config, generator, counted); });
    result.final_frame = outcome.frame;
    result.provenance = FrameProvenance{"refine", outcome.clip_index};
    result.refinement = std::move(outcome);
  }

  result.ledger = ledger;
  result.step_latents = std::move(step_latents);
  result.scorer_calls = scorer_calls;
  result.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started).count();
  return result;
}

EditResult edit(const EditRequest& request) {
  return Pipeline(request.config).edit(request.input_image, request.instruction);
}

double psnr(const Image& a, const Image& b) {
  if (a.height() != b.height() || a.width() != b.width()) throw ShapeError("psnr needs equally sized frames");
  double sse = 0.0;
  const auto pa = a.pixels();
  const auto pb = b.pixels();
  for (std::size_t i = 0; i < pa.size(); ++i) {
    const double d = std::clamp(static_cast<double>(pa[i]), 0.0, 1.0) - std::clamp(static_cast<double>(pb[i]), 0.0, 1.0);
    sse += d * d;
  }
  if (sse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(static_cast<double>(pa.size()) / sse);
}

}  // namespace ifedit
