// Python bindings. Structured values cross the boundary as plain dicts and
// lists, matching the JSON documents the CLI and HTTP API use.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "realcred/credential.hpp"
#include "realcred/error.hpp"
#include "realcred/eval.hpp"
#include "realcred/extraction.hpp"
#include "realcred/reconcile.hpp"
#include "realcred/service.hpp"
#include "realcred/synthgen.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

using namespace realcred;

json to_cpp(const py::handle& obj) {
  // Leaked on purpose: destroying it at interpreter exit would need the GIL.
  static auto* dumps = new py::object(py::module_::import("json").attr("dumps"));
  return json::parse((*dumps)(obj).cast<std::string>());
}

py::object to_py(const json& j) {
  static auto* loads = new py::object(py::module_::import("json").attr("loads"));
  return (*loads)(j.dump());
}

DocumentKind kind_arg(const std::string& s) {
  auto k = parse_kind(s);
  if (!k) throw Error(Errc::InvalidArgument, "unknown kind '" + s + "'");
  return *k;
}

MatchMode mode_arg(const std::string& s) {
  auto m = parse_mode(s);
  if (!m) throw Error(Errc::InvalidArgument, "unknown mode '" + s + "'");
  return *m;
}

NoiseProfile profile_arg(const py::object& p) {
  if (p.is_none()) return NoiseProfile::paper_like();
  if (py::isinstance<py::str>(p)) {
    const auto name = p.cast<std::string>();
    if (name == "default") return NoiseProfile::paper_like();
    if (name == "identity") return NoiseProfile::identity();
    throw Error(Errc::InvalidArgument, "profile must be a dict, 'default' or 'identity'");
  }
  auto profile = profile_from_json(to_cpp(p));
  profile.validate();
  return profile;
}

py::dict document(const GroundTruthDocument& gold, const NoiseProfile& profile, std::uint64_t noise_seed) {
  const auto tokens = apply_noise(gold, profile, noise_seed);
  py::dict out;
  out["gold"] = to_py(to_json(to_annotation(gold)));
  out["tokens"] = to_py(to_json(to_annotation(align_labels(gold, tokens))));
  return out;
}

LabeledTokenStream stream_arg(const py::object& tokens) {
  return stream_from_annotation(annotation_from_json(to_cpp(tokens)));
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Document extraction, reconciliation and credential workflow";

  static py::exception<Error> error_type(m, "RealcredError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      // args: (code, detail)
      py::object exc = py::reinterpret_borrow<py::object>(error_type.ptr())(std::string(to_string(e.code())), e.detail());
      PyErr_SetObject(error_type.ptr(), exc.ptr());
    }
  });

  m.def("levenshtein", py::overload_cast<std::string_view, std::string_view>(&levenshtein), py::arg("a"),
        py::arg("b"), "Edit distance over Unicode scalar values.");
  m.def("normalize", [](const std::string& s, const std::string& mode) { return normalize(s, mode_arg(mode)); },
        py::arg("text"), py::arg("mode"));
  m.def("validate_nif", [](const std::string& s) { return std::string(to_string(validate_nif(s))); });

  m.def("default_profile", [] { return to_py(to_json(NoiseProfile::paper_like())); });
  m.def("identity_profile", [] { return to_py(to_json(NoiseProfile::identity())); });

  m.def(
      "generate",
      [](const std::string& kind, std::uint64_t seed, const py::object& profile) {
        return document(generate_ground_truth(kind_arg(kind), seed), profile_arg(profile), seed);
      },
      py::arg("kind"), py::arg("seed"), py::arg("profile") = py::none(),
      "Gold annotation and labeled noisy tokens for one document.");

  m.def(
      "generate_case",
      [](std::uint64_t seed, const py::object& profile) {
        const auto c = generate_case(seed);
        const auto p = profile_arg(profile);
        py::dict out;
        for (auto k : kAllKinds) out[py::str(std::string(to_string(k)))] = document(c.get(k), p, seed);
        return out;
      },
      py::arg("seed"), py::arg("profile") = "identity",
      "One person and property rendered into all three kinds.");

  m.def(
      "extract",
      [](const py::object& tokens, int row_tolerance) {
        return to_py(to_json(extract_fields(stream_arg(tokens), row_tolerance).result));
      },
      py::arg("tokens"), py::arg("row_tolerance") = kDefaultRowTolerance);

  m.def(
      "reconcile",
      [](const py::list& results, double tolerance_km, const std::string& process_id) {
        std::vector<ExtractionResult> docs;
        for (const auto& r : results) docs.push_back(extraction_from_json(to_cpp(r)));
        return to_py(to_json(reconcile_documents(docs, {tolerance_km, process_id})));
      },
      py::arg("results"), py::arg("coordinate_tolerance_km") = 1.0, py::arg("process_id") = "");

  m.def(
      "run_benchmark",
      [](const std::vector<std::string>& kinds, std::size_t count, std::uint64_t seed, const py::object& profile,
         const std::vector<std::string>& modes) {
        BenchmarkConfig cfg;
        for (const auto& k : kinds) cfg.kinds.push_back(kind_arg(k));
        cfg.count = count;
        cfg.seed = seed;
        cfg.profile = profile_arg(profile);
        cfg.modes.clear();
        for (const auto& md : modes) cfg.modes.push_back(mode_arg(md));
        BenchmarkReport report;
        {
          py::gil_scoped_release release;
          report = run_benchmark(cfg);
        }
        return to_py(to_json(report));
      },
      py::arg("kinds"), py::arg("count") = 50, py::arg("seed") = 0, py::arg("profile") = py::none(),
      py::arg("modes") = std::vector<std::string>{"exact", "tolerant", "super"});

  m.def(
      "compare_human",
      [](const py::object& report, const py::object& baseline) {
        const auto rows = compare_human(benchmark_from_json(to_cpp(report)), human_baseline_from_json(to_cpp(baseline)));
        return comparison_csv(rows);
      },
      py::arg("report"), py::arg("baseline"), "Comparison table as CSV text.");

  m.def("canonicalize", [](const py::object& value) { return canonicalize(to_cpp(value)); });

  py::class_<CredentialService>(m, "Service",
                                "Credential workflow over an embedded store. data_dir='' keeps everything in memory.")
      .def(py::init([](const std::string& data_dir, double tolerance_km) {
             ServiceConfig cfg;
             cfg.data_dir = data_dir;
             cfg.coordinate_tolerance_km = tolerance_km;
             cfg.async_extraction = false;
             return std::make_unique<CredentialService>(cfg);
           }),
           py::arg("data_dir") = "", py::arg("coordinate_tolerance_km") = 1.0)
      .def_property_readonly("issuer_did", &CredentialService::issuer_did)
      .def("register_holder", [](CredentialService& s) { return s.register_generated_did().uri; })
      .def("create_process", [](CredentialService& s, const std::string& holder) {
        return to_py(to_json(s.create_process(holder)));
      })
      .def("get_process", [](CredentialService& s, const std::string& id) { return to_py(to_json(s.get_process(id))); })
      .def(
          "submit",
          [](CredentialService& s, const std::string& id, const py::object& documents) {
            return to_py(to_json(s.submit(id, batch_from_request(to_cpp(documents)))));
          },
          py::arg("process_id"), py::arg("documents"),
          "documents: {'documents': [...]} or one {'tokens' | 'tokens_path' | 'credential'} object.")
      .def(
          "validate",
          [](CredentialService& s, const std::string& id, const py::object& body) {
            return to_py(to_json(s.validate(id, validation_from_request(to_cpp(body)))));
          },
          py::arg("process_id"), py::arg("body"))
      .def("issue",
           [](CredentialService& s, const std::string& id) {
             const auto o = s.issue(id);
             py::dict out;
             out["offer_id"] = o.offer_id;
             out["expires_at"] = o.expires;
             return out;
           })
      .def("redeem", [](CredentialService& s, const std::string& offer) { return to_py(s.redeem(offer)); })
      .def("revoke_credential", &CredentialService::revoke_credential)
      .def("revoke_process",
           [](CredentialService& s, const std::string& id) { return to_py(to_json(s.revoke_process(id))); })
      .def("verify", [](CredentialService& s, const py::object& vc) { return to_py(to_json(s.verify(to_cpp(vc)))); });
}
