#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <json.hpp>
#include <map>

#include "ifedit/codec.hpp"
#include "ifedit/error.hpp"
#include "ifedit/harness.hpp"
#include "ifedit/pipeline.hpp"
#include "ifedit/tensor_io.hpp"

namespace py = pybind11;
using namespace ifedit;

namespace {

// Python exception type per error kind; the module keeps the types alive.
std::map<ErrorKind, py::handle> kinds;

using FloatArray = py::array_t<float, py::array::c_style | py::array::forcecast>;

FloatArray to_array(std::vector<std::size_t> shape, std::span<const float> data) {
  FloatArray out(shape);
  std::copy(data.begin(), data.end(), out.mutable_data());
  return out;
}

VideoLatent latent_from(const FloatArray& a) {
  if (a.ndim() != 4) throw ShapeError("latent must be a 4-d (C, F, H, W) array");
  const LatentDims dims{static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
                        static_cast<std::size_t>(a.shape(2)), static_cast<std::size_t>(a.shape(3))};
  return VideoLatent(dims, std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray latent_to(const VideoLatent& x) {
  const auto d = x.dims();
  return to_array({d.channels, d.frames, d.height, d.width}, x.data());
}

Image image_from(const FloatArray& a) {
  if (a.ndim() != 3 || a.shape(2) != 3) throw ShapeError("image must be an (H, W, 3) array");
  return Image(static_cast<std::size_t>(a.shape(0)), static_cast<std::size_t>(a.shape(1)),
               std::vector<float>(a.data(), a.data() + a.size()));
}

FloatArray image_to(const Image& img) { return to_array({img.height(), img.width(), 3}, img.pixels()); }

PixelVideo video_from(const FloatArray& a) {
  if (a.ndim() != 4 || a.shape(3) != 3) throw ShapeError("video must be an (F, H, W, 3) array");
  const auto f = static_cast<std::size_t>(a.shape(0));
  const auto h = static_cast<std::size_t>(a.shape(1));
  const auto w = static_cast<std::size_t>(a.shape(2));
  std::vector<Image> frames;
  for (std::size_t i = 0; i < f; ++i) {
    const float* p = a.data() + i * h * w * 3;
    frames.emplace_back(h, w, std::vector<float>(p, p + h * w * 3));
  }
  return PixelVideo(std::move(frames));
}

FloatArray video_to(const PixelVideo& v) {
  FloatArray out({v.size(), v.height(), v.width(), std::size_t{3}});
  float* dst = out.mutable_data();
  for (const auto& f : v.frames()) dst = std::copy(f.pixels().begin(), f.pixels().end(), dst);
  return out;
}

EditConfig config_from(const py::object& config) {
  EditConfig base;
  base.vlm = vlm_endpoint_from_env();
  if (auto ep = backend_endpoint_from_env()) base.backend.remote = *ep;
  if (config.is_none()) return base;
  const std::string text = py::module_::import("json").attr("dumps")(config).cast<std::string>();
  EditConfig c = config_from_json(nlohmann::json::parse(text), std::move(base));
  c.validate();
  return c;
}

py::dict prompt_dict(const EnhancedPrompt& p) {
  py::dict d;
  d["original"] = p.original;
  d["reasoning"] = p.reasoning;
  d["temporal_prompt"] = p.temporal_prompt;
  d["source"] = std::string(to_string(p.source));
  return d;
}

}  // namespace

PYBIND11_MODULE(_ifedit, m) {
  m.doc() = "Image editing through an image-to-video denoising pipeline";

  // Later registrations are tried first, so subclasses win over the base.
  kinds[ErrorKind::Argument] = py::register_exception<Error>(m, "IfeditError", PyExc_RuntimeError);
  const py::handle base = kinds[ErrorKind::Argument];
  kinds[ErrorKind::Shape] = py::register_exception<ShapeError>(m, "ShapeError", base);
  kinds[ErrorKind::Config] = py::register_exception<ConfigError>(m, "ConfigError", base);
  kinds[ErrorKind::Transport] = py::register_exception<TransportError>(m, "TransportError", base);
  kinds[ErrorKind::Protocol] = py::register_exception<ProtocolError>(m, "ProtocolError", base);
  kinds[ErrorKind::Contract] = py::register_exception<ContractError>(m, "ContractError", base);
  kinds[ErrorKind::Io] = py::register_exception<IoError>(m, "IoError", base);
  // Pipeline failures arrive wrapped with their phase; map them by kind.
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const StageError& e) {
      const auto it = kinds.find(e.kind());
      py::set_error(it != kinds.end() ? it->second : kinds[ErrorKind::Argument], e.what());
    }
  });

  // scheduler
  m.def("make_schedule", [](std::size_t steps) {
    const NoiseSchedule schedule = make_schedule(steps);
    std::vector<std::tuple<double, double, double>> out;
    for (const auto& s : schedule.steps()) out.emplace_back(s.t, s.alpha, s.sigma);
    return out;
  }, py::arg("steps"), "[(t, alpha, sigma), ...] on the rectified-flow grid");
  m.def("snr", py::overload_cast<double>(&snr), py::arg("t"));
  m.def("expert_for", [](double t, double switch_t) { return std::string(to_string(expert_for(t, switch_t))); },
        py::arg("t"), py::arg("switch_t") = 0.9);
  m.def("euler_step", [](const FloatArray& z, const FloatArray& x0, double t, double t_next) {
    return latent_to(euler_step(latent_from(z), latent_from(x0), t, t_next));
  }, py::arg("z"), py::arg("x0_pred"), py::arg("t"), py::arg("t_next"));

  // tld
  m.def("dropout_indices", &dropout_indices, py::arg("frames"), py::arg("stride"));
  m.def("predicted_token_steps", [](std::size_t frames, std::size_t steps, double threshold, std::size_t stride,
                                    std::size_t height, std::size_t width) {
    const auto t = predicted_token_steps(frames, steps, threshold, stride, height, width);
    return py::make_tuple(t.baseline, t.reduced);
  }, py::arg("frames"), py::arg("steps"), py::arg("threshold"), py::arg("stride"), py::arg("height") = 1,
     py::arg("width") = 1, "(baseline, reduced) token-steps");

  // backends
  m.def("posterior_mean", [](const FloatArray& z, const FloatArray& mu, double alpha, double sigma, double tau) {
    return latent_to(posterior_mean(latent_from(z), latent_from(mu), alpha, sigma, tau));
  }, py::arg("z"), py::arg("mu"), py::arg("alpha"), py::arg("sigma"), py::arg("tau"));
  m.def("temporal_blend", [](const FloatArray& x, double lambda) { return latent_to(temporal_blend(latent_from(x), lambda)); },
        py::arg("x"), py::arg("lam"));

  // scpr
  m.def("laplacian_score", [](const FloatArray& frame) { return laplacian_score(image_from(frame)); }, py::arg("frame"));
  m.def("select_sharpest", [](const std::vector<FloatArray>& frames) {
    std::vector<Image> images;
    for (const auto& f : frames) images.push_back(image_from(f));
    const auto r = select_sharpest(images);
    return py::make_tuple(r.selected, r.scores);
  }, py::arg("frames"), "(index, scores)");

  // prompt
  m.def("fallback_prompt", [](const std::string& s) { return prompt_dict(fallback_prompt(s)); }, py::arg("instruction"));
  m.def("embed", [](const std::string& s) {
    const auto e = embed(s);
    return to_array({e.size()}, e);
  }, py::arg("text"));

  // latent-core
  m.def("encode_ifed", [](const FloatArray& a) {
    DenseTensor t;
    for (py::ssize_t i = 0; i < a.ndim(); ++i) t.dims.push_back(static_cast<std::uint32_t>(a.shape(i)));
    t.data.assign(a.data(), a.data() + a.size());
    return py::bytes(encode_ifed(t));
  }, py::arg("array"));
  m.def("decode_ifed", [](const py::bytes& b) {
    const auto t = decode_ifed(std::string(b));
    return to_array(std::vector<std::size_t>(t.dims.begin(), t.dims.end()), t.data);
  }, py::arg("data"));

  // codec
  py::class_<Codec>(m, "Codec")
      .def(py::init([](std::size_t q, std::size_t p, std::uint64_t seed) { return Codec(CodecSpec{q, p, seed}); }),
           py::arg("q") = 4, py::arg("p") = 2, py::arg("seed") = CodecSpec{}.basis_seed)
      .def("encode", [](const Codec& c, const FloatArray& video) { return latent_to(c.encode(video_from(video))); })
      .def("decode", [](const Codec& c, const FloatArray& latent) { return video_to(c.decode(latent_from(latent))); })
      .def_property_readonly("channels", [](const Codec& c) { return c.spec().channels(); });

  // pipeline
  m.def("default_config", [] {
    const std::string text = config_to_json(EditConfig{}).dump();
    return py::module_::import("json").attr("loads")(text);
  });
  m.def("edit", [](const FloatArray& image, const std::string& instruction, const py::object& config) {
    const EditConfig c = config_from(config);
    const Image img = image_from(image);
    std::optional<EditResult> result;
    {
      py::gil_scoped_release release;
      result = Pipeline(c).edit(img, instruction);
    }
    const EditResult& r = *result;
    py::dict out;
    out["frame"] = image_to(r.final_frame);
    out["latent"] = latent_to(r.final_latent);
    out["latent_frames"] = r.latent_frames;
    out["provenance"] = py::make_tuple(r.provenance.clip, r.provenance.index);
    out["scores"] = r.sharpness.scores;
    out["prompt"] = prompt_dict(r.prompt);
    out["ledger_csv"] = r.ledger.to_csv();
    out["token_steps"] = r.ledger.total_token_steps();
    out["edit_token_steps"] = r.ledger.total_token_steps("edit");
    out["hash"] = r.determinism_hash();
    return out;
  }, py::arg("image"), py::arg("instruction"), py::arg("config") = py::none(),
     "Edit one (H, W, 3) float image in [0, 1]. `config` is a dict with EditConfig keys.");
  m.def("synthetic_case", [](std::uint64_t seed, std::size_t size) {
    const auto s = synthetic_case(seed, size, size);
    return py::make_tuple(image_to(s.image), s.instruction);
  }, py::arg("seed"), py::arg("size") = 64);
}
