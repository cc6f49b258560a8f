// Python bindings. Arrays cross the boundary as float64 numpy arrays; the
// ensemble is passed as an (N_MC, N_o) matrix plus optional parameters.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "tbme/detection.hpp"
#include "tbme/error.hpp"
#include "tbme/evidence.hpp"
#include "tbme/likelihood.hpp"
#include "tbme/parallel.hpp"
#include "tbme/pipeline.hpp"
#include "tbme/posterior.hpp"
#include "tbme/reference.hpp"
#include "tbme/soilfuncs.hpp"
#include "tbme/synthlab.hpp"

namespace py = pybind11;
using namespace tbme;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw ValidationError("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.data().begin());
  return m;
}

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw ValidationError("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

py::array_t<double> from_matrix(const Matrix& m) {
  py::array_t<double> out({m.rows(), m.cols()});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

template <class T>
py::array_t<T> from_vector(const std::vector<T>& v) {
  return py::array_t<T>(v.size(), v.data());
}

std::vector<double> sigma_vector(const py::object& sigma, std::size_t n) {
  if (py::isinstance<py::float_>(sigma) || py::isinstance<py::int_>(sigma)) {
    return std::vector<double>(n, sigma.cast<double>());
  }
  return to_vector(sigma.cast<Array>());
}

PredictionEnsemble make_ensemble(const Array& predictions) {
  PredictionEnsemble e;
  e.predictions = to_matrix(predictions);
  e.parameters = Matrix(e.predictions.rows(), 0);
  e.validate();
  return e;
}

LogLikTable table_for(const Array& predictions, const Array& data,
                      const py::object& sigma, std::size_t workers) {
  const std::vector<double> d = to_vector(data);
  return gauss_log_terms(to_matrix(predictions), d, sigma_vector(sigma, d.size()),
                         resolve_workers(workers));
}

py::dict bundle_dict(const CaseBundle& b) {
  py::dict d;
  d["case"] = std::string(case_name(b.id));
  d["predictions"] = from_matrix(b.ensemble.predictions);
  d["parameters"] = from_matrix(b.ensemble.parameters);
  d["parameter_names"] = b.ensemble.parameter_names;
  d["observations"] = from_vector(b.observations.values);
  d["sigma"] = from_vector(b.observations.sigma);
  d["clean"] = from_vector(b.clean);
  d["truth"] = from_vector(b.truth_row);
  py::list periods;
  for (const auto& p : b.residual_periods) periods.append(py::make_tuple(p.first, p.last));
  d["residual_periods"] = periods;
  return d;
}

}  // namespace

PYBIND11_MODULE(_tbme, m) {
  m.doc() = "Time-windowed Bayesian model evidence";
  m.attr("__version__") = kVersion;

  // Translators run newest first, so the base class is registered first.
  auto& base_error = py::register_exception<Error>(m, "TbmeError");
  py::register_exception<ValidationError>(m, "ValidationError", base_error.ptr());
  py::register_exception<NumericalError>(m, "NumericalError", base_error.ptr());
  py::register_exception<IoError>(m, "IoError", base_error.ptr());

  py::enum_<Verdict>(m, "Verdict")
      .value("inside", Verdict::inside)
      .value("below_quantile", Verdict::below_quantile)
      .value("below_minimum", Verdict::below_minimum);

  py::class_<TbmeCurve>(m, "TbmeCurve")
      .def_readonly("tau", &TbmeCurve::tau)
      .def_property_readonly("window_ends", [](const TbmeCurve& c) { return from_vector(c.window_ends); })
      .def_property_readonly("log_tbme", [](const TbmeCurve& c) { return from_vector(c.log_tbme); })
      .def_property_readonly("ess", [](const TbmeCurve& c) { return from_vector(c.ess); })
      .def("__len__", &TbmeCurve::n_windows);

  py::class_<ReferenceBands>(m, "ReferenceBands")
      .def_readonly("tau", &ReferenceBands::tau)
      .def_readonly("n_replicates", &ReferenceBands::n_replicates)
      .def_readonly("min_ess_observed", &ReferenceBands::min_ess_observed)
      .def_property_readonly("window_ends", [](const ReferenceBands& b) { return from_vector(b.window_ends); })
      .def_property_readonly("labels", [](const ReferenceBands&) {
        return std::vector<std::string>(kQuantileLabels.begin(), kQuantileLabels.end());
      })
      .def_property_readonly("quantiles", [](const ReferenceBands& b) {
        py::array_t<double> out({b.n_windows(), kQuantileCount});
        for (std::size_t k = 0; k < b.n_windows(); ++k) {
          std::copy(b.quantiles[k].begin(), b.quantiles[k].end(), out.mutable_data(k, 0));
        }
        return out;
      })
      .def("__len__", &ReferenceBands::n_windows);

  py::class_<Signal>(m, "Signal")
      .def_readonly("onset", &Signal::onset_window_end)
      .def_readonly("offset", &Signal::offset_window_end)
      .def_readonly("length", &Signal::length)
      .def_readonly("residual_length", &Signal::residual_length)
      .def_readonly("severity", &Signal::severity)
      .def("__repr__", [](const Signal& s) {
        return "Signal(" + std::to_string(s.onset_window_end) + ".." +
               std::to_string(s.offset_window_end) + ", " +
               std::string(verdict_name(s.severity)) + ")";
      });

  py::class_<Episode>(m, "Episode")
      .def_readonly("onset", &Episode::onset_window_end)
      .def_readonly("offset", &Episode::offset_window_end)
      .def_readonly("length", &Episode::length)
      .def_readonly("residual_length", &Episode::residual_length);

  py::class_<DetectionReport>(m, "DetectionReport")
      .def_readonly("tau", &DetectionReport::tau)
      .def_readonly("signals", &DetectionReport::signals)
      .def_readonly("episodes", &DetectionReport::episodes)
      .def_property_readonly("verdicts", [](const DetectionReport& r) {
        std::vector<std::string> out;
        for (Verdict v : r.verdicts) out.emplace_back(verdict_name(v));
        return out;
      })
      .def_property_readonly("states", [](const DetectionReport& r) {
        std::vector<std::string> out;
        for (State s : r.window_states) out.emplace_back(state_name(s));
        return out;
      });

  m.def("log_sum_exp", [](const Array& v) { return log_sum_exp(to_vector(v)); });
  m.def("ess", [](const Array& loglik) { return ess_of(to_vector(loglik)); },
        "Effective sample size of log-likelihood weights");

  m.def("gauss_log_terms",
        [](const Array& predictions, const Array& data, const py::object& sigma) {
          return from_matrix(table_for(predictions, data, sigma, 1).terms);
        },
        py::arg("predictions"), py::arg("data"), py::arg("sigma"));

  m.def("tbme_curve",
        [](const Array& predictions, const Array& data, const py::object& sigma,
           std::size_t tau, std::size_t workers) {
          return tbme_curve(table_for(predictions, data, sigma, workers), tau,
                            resolve_workers(workers));
        },
        py::arg("predictions"), py::arg("data"), py::arg("sigma"), py::arg("tau"),
        py::arg("workers") = 1);

  m.def("sample_reference",
        [](const Array& predictions, const py::object& sigma, std::size_t tau,
           std::size_t replicates, std::uint64_t seed, bool perturb, std::size_t workers) {
          const PredictionEnsemble e = make_ensemble(predictions);
          ReferenceOptions opt;
          opt.n_replicates = replicates;
          opt.seed = seed;
          opt.perturb = perturb;
          opt.workers = resolve_workers(workers);
          py::gil_scoped_release release;
          return sample_reference(e, sigma_vector(sigma, e.n_steps()), tau, opt);
        },
        py::arg("predictions"), py::arg("sigma"), py::arg("tau"),
        py::arg("replicates") = 1000, py::arg("seed") = 0, py::arg("perturb") = false,
        py::arg("workers") = 1);

  m.def("detect",
        [](const TbmeCurve& curve, const ReferenceBands& bands, const std::string& alpha,
           bool excursion) {
          DetectionOptions opt;
          opt.alpha = parse_quantile_level(alpha);
          opt.excursion = excursion;
          return detect(curve, bands, opt);
        },
        py::arg("curve"), py::arg("bands"), py::arg("alpha") = "q025",
        py::arg("excursion") = false);

  m.def("posterior_weights",
        [](const Array& predictions, const Array& data, const py::object& sigma,
           std::size_t window_end, std::size_t tau) {
          const PosteriorSnapshot s =
              posterior_weights(table_for(predictions, data, sigma, 1), window_end, tau);
          return py::make_tuple(from_vector(s.weights), s.ess, s.map_index);
        },
        py::arg("predictions"), py::arg("data"), py::arg("sigma"), py::arg("window_end"),
        py::arg("tau"), "Returns (weights, ess, map_index).");

  m.def("weighted_quantile",
        [](const Array& values, const Array& weights, double q) {
          return weighted_quantile(to_vector(values), to_vector(weights), q);
        },
        py::arg("values"), py::arg("weights"), py::arg("q"));

  m.def("weighted_kde",
        [](const Array& values, const Array& weights, const Array& grid, double bandwidth) {
          return from_vector(
              weighted_kde(to_vector(values), to_vector(weights), to_vector(grid), bandwidth));
        },
        py::arg("values"), py::arg("weights"), py::arg("grid"), py::arg("bandwidth") = 0.0);

  py::class_<MvgParams>(m, "MvgParams")
      .def(py::init([](double theta_r, double theta_s, double alpha, double n, double K_sat,
                       double l, double h_s) {
             MvgParams p{theta_r, theta_s, alpha, n, K_sat, l, h_s};
             p.validate();
             return p;
           }),
           py::arg("theta_r"), py::arg("theta_s"), py::arg("alpha"), py::arg("n"),
           py::arg("K_sat"), py::arg("l"), py::arg("h_s") = -0.02)
      .def_readonly("theta_r", &MvgParams::theta_r)
      .def_readonly("theta_s", &MvgParams::theta_s)
      .def_readonly("alpha", &MvgParams::alpha)
      .def_readonly("n", &MvgParams::n)
      .def_readonly("K_sat", &MvgParams::K_sat)
      .def_readonly("l", &MvgParams::l)
      .def_readonly("h_s", &MvgParams::h_s);

  m.def("mvg_theta", py::vectorize([](double h, MvgParams p) { return mvg_theta(h, p); }));
  m.def("mvg_conductivity",
        py::vectorize([](double h, MvgParams p) { return mvg_conductivity(h, p); }));
  m.def("mualem_conductivity",
        py::vectorize([](double se, MvgParams p) { return mualem_conductivity(se, p); }));

  m.def("build_case",
        [](const std::string& name, std::size_t n_mc, int horizon, std::uint64_t seed,
           double sigma, std::size_t workers) {
          CaseConfig cfg;
          cfg.n_mc = n_mc;
          cfg.horizon = horizon;
          cfg.seed = seed;
          cfg.sigma = sigma;
          cfg.workers = resolve_workers(workers);
          CaseBundle b;
          {
            py::gil_scoped_release release;
            b = build_case(parse_case(name), cfg);
          }
          return bundle_dict(b);
        },
        py::arg("case") = "base", py::arg("n_mc") = 2000, py::arg("horizon") = 200,
        py::arg("seed") = 7, py::arg("sigma") = 0.01, py::arg("workers") = 1);

  m.def("run",
        [](const std::filesystem::path& ensemble, const std::filesystem::path& observations,
           const std::filesystem::path& out, std::vector<std::size_t> taus,
           std::size_t replicates, std::uint64_t seed, std::size_t workers) {
          RunConfig c;
          c.ensemble_path = ensemble;
          c.observations_path = observations;
          c.out_dir = out;
          c.tau_list = std::move(taus);
          c.n_replicates = replicates;
          c.seed = seed;
          c.workers = workers;
          RunManifest manifest;
          {
            py::gil_scoped_release release;
            manifest = run_pipeline(c);
          }
          py::dict files;
          for (const auto& f : manifest.files) files[py::str(f.path.generic_string())] = f.sha256;
          py::list outcomes;
          for (const auto& o : manifest.outcomes) {
            py::dict d;
            d["tau"] = o.tau;
            d["ok"] = o.ok;
            d["error"] = o.error;
            d["signals"] = o.n_signals;
            d["converged"] = o.converged;
            outcomes.append(d);
          }
          py::dict result;
          result["files"] = files;
          result["outcomes"] = outcomes;
          return result;
        },
        py::arg("ensemble"), py::arg("observations"), py::arg("out"),
        py::arg("tau") = std::vector<std::size_t>{5, 10, 15, 20}, py::arg("replicates") = 1000,
        py::arg("seed") = 0, py::arg("workers") = 0);
}
