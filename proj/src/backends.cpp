#include "ifedit/backends.hpp"

#include <bit>
#include <cmath>
#include <cstdlib>
#include <json.hpp>

#include "ifedit/encoding.hpp"
#include "ifedit/error.hpp"
#include "ifedit/tensor_io.hpp"

namespace ifedit {

void DenoiserInput::validate() const {
  if (!(t > 0.0 && t <= 1.0)) throw ArgumentError("denoiser timestep must lie in (0, 1], got " + std::to_string(t));
  if (z.dims().frames != y.dims().frames || z.height() != y.height() || z.width() != y.width()) {
    throw ShapeError("denoiser input: z " + to_string(z.dims()) + " and y " + to_string(y.dims()) +
                     " disagree on (F, H, W)");
  }
  if (m.frames() != z.frames() || m.height() != z.height() || m.width() != z.width()) {
    throw ShapeError("denoiser input: mask dims disagree with z " + to_string(z.dims()));
  }
  if (frames.size() != z.frames()) {
    throw ShapeError("denoiser input: " + std::to_string(frames.size()) + " frame ids for " +
                     std::to_string(z.frames()) + " latent frames");
  }
  for (std::size_t i = 1; i < frames.size(); ++i) {
    if (frames[i] <= frames[i - 1]) throw ArgumentError("denoiser input: frame ids must strictly increase");
  }
}

MotionVelocity motion_velocity(const PromptEmbedding& embedding, const MotionProgram& motion) {
  if (motion.identity) return {};
  std::string message = "ifedit-motion-v1:";
  for (int i = 0; i < 8; ++i) message.push_back(static_cast<char>((motion.seed >> (8 * i)) & 0xFF));
  for (float v : embedding) {
    const auto bits = std::bit_cast<std::uint32_t>(v);
    for (int i = 0; i < 4; ++i) message.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  const auto digest = sha256(message);
  auto unit = [&](std::size_t at) {
    std::uint32_t word = 0;
    for (std::size_t b = 0; b < 4; ++b) word |= static_cast<std::uint32_t>(digest[at + b]) << (8 * b);
    return static_cast<double>(word) / 4294967295.0 * 2.0 - 1.0;
  };
  return {motion.max_speed * unit(0), motion.max_speed * unit(4)};
}

std::pair<long, long> motion_offset(const MotionVelocity& v, std::size_t frame) {
  const double f = static_cast<double>(frame);
  return {std::lround(v.dx * f), std::lround(v.dy * f)};
}

Image circular_shift(const Image& image, long dx, long dy) {
  const auto h = static_cast<long>(image.height());
  const auto w = static_cast<long>(image.width());
  std::vector<float> out(image.pixels().size());
  for (long r = 0; r < h; ++r) {
    const long src_r = ((r - dy) % h + h) % h;
    for (long c = 0; c < w; ++c) {
      const long src_c = ((c - dx) % w + w) % w;
      for (std::size_t ch = 0; ch < 3; ++ch) {
        out[static_cast<std::size_t>((r * w + c) * 3) + ch] =
            image.at(static_cast<std::size_t>(src_r), static_cast<std::size_t>(src_c), ch);
      }
    }
  }
  return Image(image.height(), image.width(), std::move(out));
}

VideoLatent target_latent(const DenoiserInput& input, const Codec& codec, const MotionProgram& motion) {
  input.validate();
  if (input.frames.front() != 0) throw ArgumentError("target_latent needs latent frame 0 among the slices");
  if (input.y.channels() != codec.spec().channels()) {
    throw ShapeError("conditioning has " + std::to_string(input.y.channels()) + " channels, codec expects " +
                     std::to_string(codec.spec().channels()));
  }
  const std::size_t q = codec.spec().temporal_factor;
  const LatentDims dims = input.y.dims();
  const std::size_t sites = dims.sites();
  const Image source = codec.decode_slice(input.y, 0, 1).front();
  const MotionVelocity velocity = motion_velocity(input.embedding, motion);

  std::vector<float> data(dims.size());
  for (std::size_t k = 0; k < input.frames.size(); ++k) {
    const std::size_t j = input.frames[k];
    if (j == 0) {
      for (std::size_t c = 0; c < dims.channels; ++c) {
        auto src = input.y.data().subspan(input.y.offset(c, 0, 0, 0), sites);
        std::copy(src.begin(), src.end(), data.begin() + static_cast<std::ptrdiff_t>((c * dims.frames + k) * sites));
      }
      continue;
    }
    std::vector<Image> group;
    group.reserve(q);
    for (std::size_t s = 0; s < q; ++s) {
      const auto [dx, dy] = motion_offset(velocity, 1 + (j - 1) * q + s);
      group.push_back(circular_shift(source, dx, dy));
    }
    const std::vector<float> block = codec.encode_group(group);
    for (std::size_t c = 0; c < dims.channels; ++c) {
      std::copy_n(block.begin() + static_cast<std::ptrdiff_t>(c * sites), sites,
                  data.begin() + static_cast<std::ptrdiff_t>((c * dims.frames + k) * sites));
    }
  }
  return VideoLatent(dims, std::move(data));
}

VideoLatent posterior_mean(const VideoLatent& z, const VideoLatent& mu, double alpha, double sigma, double tau) {
  if (z.dims() != mu.dims()) throw ShapeError("posterior_mean: z " + to_string(z.dims()) + " vs mu " + to_string(mu.dims()));
  if (!(sigma > 0.0)) throw DomainError("posterior_mean needs sigma > 0");
  if (!(tau >= 0.0) || !std::isfinite(tau)) throw ArgumentError("prior std tau must be finite and >= 0");
  const double gain = alpha * tau * tau / (alpha * alpha * tau * tau + sigma * sigma);
  auto zs = z.data();
  auto ms = mu.data();
  std::vector<float> out(zs.size());
  for (std::size_t i = 0; i < zs.size(); ++i) {
    const double m = ms[i];
    out[i] = static_cast<float>(m + gain * (static_cast<double>(zs[i]) - alpha * m));
  }
  return VideoLatent(z.dims(), std::move(out));
}

VideoLatent temporal_blend(const VideoLatent& x, double lambda) {
  if (!(lambda >= 0.0 && lambda < 1.0)) throw ArgumentError("coupling lambda must lie in [0, 1)");
  const std::size_t frames = x.frames();
  if (lambda == 0.0 || frames == 1) return x;
  const std::size_t plane = x.dims().sites();
  auto in = x.data();
  std::vector<float> out(in.size());
  for (std::size_t c = 0; c < x.channels(); ++c) {
    for (std::size_t f = 0; f < frames; ++f) {
      const std::size_t base = x.offset(c, f, 0, 0);
      const bool has_prev = f > 0;
      const bool has_next = f + 1 < frames;
      for (std::size_t s = 0; s < plane; ++s) {
        double sum = 0.0;
        if (has_prev) sum += in[base - plane + s];
        if (has_next) sum += in[base + plane + s];
        const double neighbours = sum / static_cast<double>(int(has_prev) + int(has_next));
        const double self = in[base + s];
        out[base + s] = static_cast<float>((1.0 - lambda) * self + lambda * neighbours);
      }
    }
  }
  return VideoLatent(x.dims(), std::move(out));
}

AnalyticBackend::AnalyticBackend(Codec codec, AnalyticSpec spec) : codec_(std::move(codec)), spec_(spec) {
  if (!(spec_.tau >= 0.0) || !std::isfinite(spec_.tau)) throw ArgumentError("prior std tau must be finite and >= 0");
}

VideoLatent AnalyticBackend::predict(const DenoiserInput& input) const {
  if (input.z.dims() != input.y.dims()) {
    throw ShapeError("analytic backend: z " + to_string(input.z.dims()) + " vs y " + to_string(input.y.dims()));
  }
  const VideoLatent mu = target_latent(input, codec_, spec_.motion);
  return posterior_mean(input.z, mu, 1.0 - input.t, input.t, spec_.tau);
}

std::string AnalyticBackend::descriptor() const {
  return "analytic(tau=" + std::to_string(spec_.tau) + (spec_.motion.identity ? ",motion=identity" : "") + ")";
}

CoupledBackend::CoupledBackend(Codec codec, AnalyticSpec spec, double lambda)
    : base_(std::move(codec), spec), lambda_(lambda) {
  if (!(lambda_ >= 0.0 && lambda_ < 1.0)) throw ArgumentError("coupling lambda must lie in [0, 1)");
}

VideoLatent CoupledBackend::predict(const DenoiserInput& input) const {
  return temporal_blend(base_.predict(input), lambda_);
}

std::string CoupledBackend::descriptor() const {
  return "coupled(lambda=" + std::to_string(lambda_) + "," + base_.descriptor() + ")";
}

RemoteBackend::RemoteBackend(HttpEndpoint endpoint) : endpoint_(std::move(endpoint)) {
  if (endpoint_.base_url.empty()) throw ConfigError("remote backend needs a base URL (IFEDIT_BACKEND_URL)");
}

VideoLatent RemoteBackend::predict(const DenoiserInput& input) const {
  input.validate();
  const std::string reply = post_json(endpoint_, "/v1/predict", encode_predict_request(input));
  return decode_predict_response(reply, input.z.dims());
}

std::string RemoteBackend::descriptor() const { return "remote(" + endpoint_.base_url + ")"; }

std::optional<HttpEndpoint> backend_endpoint_from_env() {
  const char* url = std::getenv("IFEDIT_BACKEND_URL");
  if (url == nullptr || *url == '\0') return std::nullopt;
  HttpEndpoint endpoint;
  endpoint.base_url = url;
  if (const char* ms = std::getenv("IFEDIT_BACKEND_TIMEOUT_MS"); ms != nullptr && *ms != '\0') {
    endpoint.timeout_ms = std::atoi(ms);
  }
  return endpoint;
}

std::string encode_predict_request(const DenoiserInput& input) {
  nlohmann::json body = {
      {"z", base64_encode(encode_ifed(to_dense(input.z)))},
      {"y", base64_encode(encode_ifed(to_dense(input.y)))},
      {"m", base64_encode(encode_ifed(to_dense(input.m)))},
      {"t", input.t},
      {"emb", input.embedding},
      {"frames", input.frames},
  };
  return body.dump();
}

DenoiserInput decode_predict_request(const std::string& body) {
  try {
    const auto doc = nlohmann::json::parse(body);
    auto tensor = [&](const char* key) { return decode_ifed(base64_decode(doc.at(key).get<std::string>())); };
    DenoiserInput input{latent_from_dense(tensor("z")), latent_from_dense(tensor("y")), mask_from_dense(tensor("m")),
                        doc.at("t").get<double>(), doc.at("emb").get<PromptEmbedding>(), {}};
    if (doc.contains("frames")) {
      input.frames = doc.at("frames").get<std::vector<std::size_t>>();
    } else {
      for (std::size_t i = 0; i < input.z.frames(); ++i) input.frames.push_back(i);
    }
    input.validate();
    return input;
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed predict request: ") + e.what());
  }
}

std::string encode_predict_response(const VideoLatent& x0) {
  return nlohmann::json{{"x0", base64_encode(encode_ifed(to_dense(x0)))}}.dump();
}

VideoLatent decode_predict_response(const std::string& body, const LatentDims& expected) {
  DenseTensor dense;
  try {
    const auto doc = nlohmann::json::parse(body);
    dense = decode_ifed(base64_decode(doc.at("x0").get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed predict response: ") + e.what());
  }
  const std::vector<std::uint32_t> want{static_cast<std::uint32_t>(expected.channels),
                                        static_cast<std::uint32_t>(expected.frames),
                                        static_cast<std::uint32_t>(expected.height),
                                        static_cast<std::uint32_t>(expected.width)};
  if (dense.dims != want) {
    std::string got = "(";
    for (std::size_t i = 0; i < dense.dims.size(); ++i) got += (i ? "," : "") + std::to_string(dense.dims[i]);
    got += ")";
    throw ContractError("remote x0 has dims " + got + ", expected " + to_string(expected));
  }
  try {
    return latent_from_dense(dense);
  } catch (const DomainError& e) {
    throw ContractError(std::string("remote x0 rejected: ") + e.what());
  }
}

std::string serve_predict(const DenoiserBackend& backend, const std::string& body) {
  return encode_predict_response(backend.predict(decode_predict_request(body)));
}

MoEDenoiser::MoEDenoiser(std::shared_ptr<const DenoiserBackend> high, std::shared_ptr<const DenoiserBackend> low,
                         double switch_t)
    : high_(std::move(high)), low_(std::move(low)), switch_t_(switch_t) {
  if (!high_ || !low_) throw ArgumentError("MoE denoiser needs both experts");
  if (!(switch_t_ > 0.0 && switch_t_ < 1.0)) throw ArgumentError("switch_t must lie in (0, 1)");
}

MoEPrediction MoEDenoiser::predict(const DenoiserInput& input) const {
  const ExpertPhase phase = expert_for(input.t, switch_t_);
  const DenoiserBackend& expert = phase == ExpertPhase::HighNoise ? *high_ : *low_;
  return {expert.predict(input), phase};
}

}  // namespace ifedit
