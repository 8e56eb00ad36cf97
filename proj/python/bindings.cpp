#include "phaseest/equivstate.hpp"
#include "phaseest/experiment.hpp"
#include "phaseest/montecarlo.hpp"
#include "phaseest/posterior.hpp"
#include "phaseest/schemes.hpp"

#include <pybind11/complex.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <string>

namespace py = pybind11;
using namespace phaseest;

namespace {

py::object json_to_py(const nlohmann::json& j) {
  py::module_ json_mod = py::module_::import("json");
  return json_mod.attr("loads")(j.dump());
}

nlohmann::json py_to_json(const py::object& obj) {
  py::module_ json_mod = py::module_::import("json");
  std::string text = py::cast<std::string>(json_mod.attr("dumps")(obj));
  return nlohmann::json::parse(text);
}

SchemeSpec scheme_from_py(const py::object& obj) {
  return SchemeSpec::from_json(py_to_json(obj));
}

std::vector<double> state_psi_sq(const TwoModeState& s) {
  std::vector<double> p(s.amps.size());
  for (size_t i = 0; i < p.size(); ++i) p[i] = s.amps[i] * s.amps[i];
  return p;
}

py::dict report_to_py(const VarianceReport& r) {
  return py::cast<py::dict>(json_to_py(r.to_json()));
}

py::dict record_to_py(const TrialRecord& r) {
  py::dict d;
  d["phi_true"] = r.phi_true;
  d["phi1"] = r.phi1;
  d["relative_phase"] = r.relative_phase;
  d["outcomes"] = py::cast(std::vector<int>(r.outcomes.begin(), r.outcomes.end()));
  d["feedback"] = py::cast(r.feedback);
  d["resources"] = r.resources;
  d["estimate"] = r.estimate;
  d["final_sharpness"] = r.final_sharpness;
  if (!r.intermediates.empty()) {
    py::list pts;
    for (const auto& p : r.intermediates)
      pts.append(py::make_tuple(p.resources, p.estimate, p.sharpness));
    d["intermediates"] = pts;
  }
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "NOON-state phase estimation: posteriors, schemes, Monte Carlo";

  py::class_<FeedbackPhase>(m, "FeedbackPhase")
      .def(py::init<>())
      .def(py::init([](double v, bool inf) { return FeedbackPhase{v, inf}; }),
           py::arg("value"), py::arg("informative") = true)
      .def_readwrite("value", &FeedbackPhase::value)
      .def_readwrite("informative", &FeedbackPhase::informative)
      .def("__repr__", [](const FeedbackPhase& f) {
        return "FeedbackPhase(" + std::to_string(f.value) +
               (f.informative ? ")" : ", informative=False)");
      });

  py::class_<PhaseLikelihood>(m, "PhaseLikelihood")
      .def_static("flat", &PhaseLikelihood::flat, py::arg("max_order"), py::arg("level") = 0)
      .def_property_readonly("level", &PhaseLikelihood::level)
      .def_property_readonly("max_order", &PhaseLikelihood::max_order)
      .def_property_readonly("top_harmonic", &PhaseLikelihood::top_harmonic)
      .def("coeff", &PhaseLikelihood::coeff, py::arg("j"))
      .def("branch_weight", &PhaseLikelihood::branch_weight)
      .def("mu_weight", &PhaseLikelihood::mu_weight)
      .def("sharpness", &PhaseLikelihood::sharpness)
      .def("phase_estimate", &PhaseLikelihood::phase_estimate)
      .def("evaluate", &PhaseLikelihood::evaluate, py::arg("phi"))
      .def("normalized", &PhaseLikelihood::normalized);

  m.def("flat_likelihood", &flat_likelihood, py::arg("max_order"), py::arg("level") = 0);
  m.def("noon_outcome_prob", &noon_outcome_prob, py::arg("u"), py::arg("phi"),
        py::arg("nu"), py::arg("Phi"));
  m.def("bayes_update", &bayes_update, py::arg("L"), py::arg("u"), py::arg("Phi"),
        py::arg("nu"));
  m.def("rescale_level", &rescale_level, py::arg("L"));
  m.def("truncated", &truncated, py::arg("L"), py::arg("max_order"));
  m.def("optimal_feedback", &optimal_feedback, py::arg("L"));
  m.def("maximize_expected_sharpness", &maximize_expected_sharpness, py::arg("L"),
        py::arg("shift"), py::arg("target_harmonic") = 1);
  m.def("equal_probability_feedback", &equal_probability_feedback, py::arg("L"),
        py::arg("nu"));
  m.def("wrap_angle", &wrap_angle, py::arg("phi"));

  py::class_<TwoModeState>(m, "TwoModeState")
      .def_readonly("amps", &TwoModeState::amps)
      .def_property_readonly("total_n", &TwoModeState::total_n)
      .def_property_readonly("psi_sq", &state_psi_sq);

  m.def("copies_state", &copies_state, py::arg("n_k"), py::arg("m"));
  m.def("hybrid_state", &hybrid_state, py::arg("n_k"), py::arg("m"));
  m.def("uniform_state", &uniform_state, py::arg("n_k"));
  m.def("canonical_mu", &canonical_mu);
  m.def("collett_variance", &collett_variance);
  m.def("holevo_variance", &holevo_variance);
  m.def("holevo_from_mu", &holevo_from_mu, py::arg("mu"));
  m.def("number_moments", [](const TwoModeState& s) {
    Moments mo = number_moments(s);
    return py::make_tuple(mo.mean, mo.second, mo.variance);
  });
  m.def("heisenberg_limit_stddev", &heisenberg_limit_stddev, py::arg("n"));
  m.def("repetition_bound", &repetition_bound, py::arg("n_k"), py::arg("m"));
  m.def("hybrid_bound", &hybrid_bound, py::arg("n_k"), py::arg("m"));
  m.def("hybrid_bound_kappa", &hybrid_bound_kappa);
  m.def("extrapolate_two_copy_constant", &extrapolate_two_copy_constant,
        py::arg("nk_ladder"));

  py::class_<SchemeSpec>(m, "SchemeSpec")
      .def_static("from_dict", &scheme_from_py, py::arg("d"))
      .def("to_dict", [](const SchemeSpec& s) { return json_to_py(s.to_json()); })
      .def_property_readonly("name", &SchemeSpec::name)
      .def("nominal_resources", &SchemeSpec::nominal_resources)
      .def("fixed_sequence", &SchemeSpec::fixed_sequence)
      .def("__repr__", [](const SchemeSpec& s) { return s.to_json().dump(); });

  m.def(
      "run_trial",
      [](const py::object& spec, double phi_true, double phi1, uint64_t seed,
         uint64_t stream) {
        TrialRng rng(seed, stream);
        return record_to_py(run_trial(scheme_from_py(spec), phi_true, phi1, rng));
      },
      py::arg("scheme"), py::arg("phi_true"), py::arg("phi1"), py::arg("seed"),
      py::arg("stream") = 0);

  m.def(
      "enumerate_exact",
      [](const py::object& spec) { return report_to_py(enumerate_exact(scheme_from_py(spec))); },
      py::arg("scheme"));

  m.def(
      "estimate_montecarlo",
      [](const py::object& spec, uint64_t samples, uint64_t seed, unsigned threads) {
        return report_to_py(estimate_montecarlo(scheme_from_py(spec), samples, seed, threads));
      },
      py::arg("scheme"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 1);

  m.def(
      "estimate_montecarlo_curve",
      [](const py::object& spec, uint64_t samples, uint64_t seed, unsigned threads,
         uint64_t stride) {
        py::list out;
        for (const auto& rep :
             estimate_montecarlo_curve(scheme_from_py(spec), samples, seed, threads, stride))
          out.append(report_to_py(rep));
        return out;
      },
      py::arg("scheme"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 1,
      py::arg("stride") = 1);

  m.def(
      "sweep",
      [](const py::list& specs, uint64_t samples, uint64_t seed, unsigned threads) {
        std::vector<SchemeSpec> ss;
        for (const auto& s : specs) ss.push_back(scheme_from_py(py::cast<py::object>(s)));
        py::list out;
        for (const auto& entry : sweep(ss, samples, seed, threads)) {
          py::dict d;
          if (entry.report) d["report"] = report_to_py(*entry.report);
          else d["error"] = entry.error;
          out.append(d);
        }
        return out;
      },
      py::arg("schemes"), py::arg("samples"), py::arg("seed"), py::arg("threads") = 1);

  m.def(
      "run_config",
      [](const py::object& config) {
        return run_command(ExperimentConfig::from_json(py_to_json(config)));
      },
      py::arg("config"), "Execute an experiment config dict; returns the CSV/text output.");
}
