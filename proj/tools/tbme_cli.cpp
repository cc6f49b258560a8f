// tbme: sliding-window Bayesian model evidence diagnostics.
//
// Every subcommand reads and writes the plain-text formats of tbme::io, so
// stages compose through the filesystem:
//
//   tbme synth --case structural --out work
//   tbme tbme --ensemble work/case_structural/ensemble_predictions.csv \
//             --obs work/case_structural/observations.csv --tau 20 --out res
//   tbme reference --ensemble ... --obs ... --tau 20 --replicates 1000 --out res
//   tbme detect --in res --tau 20
//
// Exit codes: 0 success, 1 validation error, 2 numerical degeneracy, 3 I/O.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "tbme/dataio.hpp"
#include "tbme/error.hpp"
#include "tbme/parallel.hpp"
#include "tbme/pipeline.hpp"
#include "tbme/synthlab.hpp"

namespace fs = std::filesystem;
using namespace tbme;

namespace {

struct DataArgs {
  std::string ensemble;
  std::string obs;
  std::optional<double> sigma;
};

void add_data_args(CLI::App* cmd, DataArgs& args, bool need_obs = true) {
  cmd->add_option("--ensemble", args.ensemble,
                  "ensemble_predictions.csv (parameters/bounds read alongside)")
      ->required()
      ->check(CLI::ExistingFile);
  auto* obs = cmd->add_option("--obs", args.obs, "observations.csv")
                  ->check(CLI::ExistingFile);
  if (need_obs) obs->required();
  cmd->add_option("--sigma", args.sigma,
                  "measurement sigma in the data's unit (overrides the file)");
}

std::vector<std::size_t> default_taus() { return {5, 10, 15, 20}; }

int run_synth(CaseId id, const CaseConfig& cfg, const fs::path& out) {
  const CaseBundle bundle = build_case(id, cfg);
  const fs::path dir = out / ("case_" + std::string(case_name(id)));
  const auto files = io::save_case(bundle, dir);
  std::cout << "case " << case_name(id) << ": " << bundle.ensemble.n_mc()
            << " members x " << bundle.ensemble.n_steps() << " days";
  if (bundle.resampled > 0) std::cout << ", " << bundle.resampled << " redraws";
  std::cout << "\n";
  for (const auto& p : bundle.residual_periods) {
    std::cout << "  residual period days " << p.first << "-" << p.last << "\n";
  }
  for (const auto& f : files) std::cout << "  wrote " << f.string() << "\n";
  return 0;
}

int report_manifest(const RunManifest& m) {
  int code = 0;
  for (const auto& o : m.outcomes) {
    if (o.ok) {
      std::cout << "tau=" << o.tau << ": " << o.n_signals << " signal(s)"
                << (o.converged ? "" : " [reference ESS below floor]") << "\n";
    } else {
      std::cerr << o.error << "\n";
      if (code == 0) code = o.exit_code;
    }
  }
  std::cout << "manifest: " << (m.config.out_dir / "manifest.json").string()
            << " (" << m.files.size() << " files)\n";
  return code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Time-windowed Bayesian model evidence: detect time-dependent "
               "model error from a Monte Carlo prediction ensemble"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // synth
  std::string case_label = "base";
  std::string out_dir = "out";
  CaseConfig case_cfg;
  std::string forcing_path;
  auto* synth = app.add_subcommand("synth", "Generate a synthetic case directory");
  synth->add_option("--case", case_label, "base | structural | forcing | superimposed");
  synth->add_option("--out", out_dir, "output directory (case_<id>/ is created)");
  synth->add_option("--n-mc", case_cfg.n_mc, "ensemble size")->check(CLI::PositiveNumber);
  synth->add_option("--seed", case_cfg.seed, "prior sampling seed");
  synth->add_option("--sigma", case_cfg.sigma, "measurement sigma (m)")->check(CLI::PositiveNumber);
  synth->add_option("--forcing", forcing_path, "forcing.csv (default: built-in fixture)")
      ->check(CLI::ExistingFile);
  synth->add_option("--workers", case_cfg.workers, "threads (0 = all cores)");

  // forcing fixture
  int horizon = 200;
  std::uint64_t forcing_seed = 20;
  std::string forcing_out = "forcing.csv";
  auto* forcing = app.add_subcommand("forcing", "Write the built-in synthetic forcing");
  forcing->add_option("--horizon", horizon, "days");
  forcing->add_option("--seed", forcing_seed, "weather seed");
  forcing->add_option("--out", forcing_out, "output file");

  // tbme
  DataArgs data;
  std::vector<std::size_t> taus;
  auto* curve_cmd = app.add_subcommand("tbme", "Compute tBME curves");
  add_data_args(curve_cmd, data);
  curve_cmd->add_option("--tau", taus, "window size(s)")->required();
  curve_cmd->add_option("--out", out_dir, "output directory");

  // reference
  std::size_t replicates = 1000;
  std::uint64_t seed = 0;
  bool perturb = false;
  std::optional<double> min_ess;
  std::size_t workers = 1;
  auto* ref_cmd = app.add_subcommand("reference", "Sample the tBME reference distribution");
  add_data_args(ref_cmd, data, false);
  ref_cmd->add_option("--tau", taus, "window size(s)")->required();
  ref_cmd->add_option("--replicates", replicates, "synthetic-data replicates");
  ref_cmd->add_option("--seed", seed, "replicate seed");
  ref_cmd->add_flag("--perturb", perturb, "add measurement noise to synthetic data");
  ref_cmd->add_option("--min-ess", min_ess, "ESS floor (default max(10, N_MC/100))");
  ref_cmd->add_option("--out", out_dir, "output directory");
  ref_cmd->add_option("--workers", workers, "threads (0 = all cores)");

  // detect
  std::string in_dir;
  std::string alpha_label = "q025";
  bool excursion = false;
  auto* det_cmd = app.add_subcommand("detect", "Test a tBME curve against its reference");
  det_cmd->add_option("--in", in_dir, "directory holding tbme_tau<T>.csv and reference_tau<T>.csv");
  det_cmd->add_option("--tau", taus, "window size(s)")->required();
  det_cmd->add_option("--alpha", alpha_label, "threshold quantile label, e.g. q025");
  det_cmd->add_flag("--excursion", excursion, "extend signals to the last q160 crossing");
  det_cmd->add_option("--out", out_dir, "output directory (default: --in)");

  // posterior
  std::vector<std::size_t> windows;
  auto* post_cmd = app.add_subcommand("posterior", "Posterior snapshot at given windows");
  add_data_args(post_cmd, data);
  post_cmd->add_option("--tau", taus, "window size")->required()->expected(1);
  post_cmd->add_option("--window", windows, "window end day(s)")->required();
  post_cmd->add_option("--out", out_dir, "output directory");

  // run
  std::string config_path;
  RunConfig run_cfg;
  std::string run_case;
  auto* run_cmd = app.add_subcommand("run", "Full pipeline for every tau");
  run_cmd->add_option("--config", config_path, "JSON run config")->check(CLI::ExistingFile);
  run_cmd->add_option("--ensemble", data.ensemble, "ensemble_predictions.csv");
  run_cmd->add_option("--obs", data.obs, "observations.csv");
  run_cmd->add_option("--case", run_case, "generate this synthetic case first and analyse it");
  run_cmd->add_option("--tau", taus, "window sizes (default 5,10,15,20)");
  run_cmd->add_option("--sigma", data.sigma, "measurement sigma");
  run_cmd->add_option("--replicates", replicates, "reference replicates");
  run_cmd->add_option("--seed", seed, "reference seed");
  run_cmd->add_option("--alpha", alpha_label, "threshold quantile label");
  run_cmd->add_option("--min-ess", min_ess, "ESS floor");
  run_cmd->add_flag("--perturb", perturb, "perturb synthetic reference data");
  run_cmd->add_flag("--excursion", excursion, "excursion-mode signal lengths");
  run_cmd->add_option("--out", out_dir, "output directory");
  run_cmd->add_option("--workers", workers, "threads (0 = all cores)");

  // validate
  std::string validate_forcing;
  auto* val_cmd = app.add_subcommand("validate", "Schema check of input files");
  add_data_args(val_cmd, data, false);
  val_cmd->add_option("--forcing", validate_forcing, "forcing.csv")->check(CLI::ExistingFile);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(ErrorKind::validation);
  }

  try {
    if (*synth) {
      if (!forcing_path.empty()) case_cfg.forcing = io::load_forcing(forcing_path);
      return run_synth(parse_case(case_label), case_cfg, out_dir);
    }
    if (*forcing) {
      io::save_forcing(default_forcing(horizon, forcing_seed), forcing_out);
      std::cout << "wrote " << forcing_out << "\n";
      return 0;
    }
    if (*curve_cmd) {
      auto [ens, obs] = io::load_dataset(data.ensemble, data.obs, data.sigma);
      const LogLikTable table = gauss_log_terms(ens, obs);
      for (std::size_t tau : taus) {
        const auto path = io::write_curve(tbme_curve(table, tau),
                                          fs::path(out_dir) / io::curve_file_name(tau));
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }
    if (*ref_cmd) {
      const fs::path ens_path = data.ensemble;
      PredictionEnsemble ens = io::load_ensemble(ens_path);
      std::vector<double> sigma;
      if (!data.obs.empty()) {
        sigma = io::load_observations(data.obs, data.sigma).sigma;
      } else if (data.sigma) {
        sigma.assign(ens.n_steps(), *data.sigma);
      } else {
        throw ValidationError("reference needs --obs or --sigma");
      }
      ReferenceOptions opt;
      opt.n_replicates = replicates;
      opt.seed = seed;
      opt.perturb = perturb;
      opt.workers = resolve_workers(workers);
      const double floor = min_ess.value_or(default_ess_floor(ens.n_mc()));
      int code = 0;
      for (std::size_t tau : taus) {
        const ReferenceBands bands = sample_reference(ens, sigma, tau, opt);
        const auto path =
            io::write_bands(bands, fs::path(out_dir) / io::reference_file_name(tau));
        const ConvergenceReport conv = check_convergence(bands, floor);
        std::cout << "wrote " << path.string() << " (min ESS "
                  << bands.min_ess_observed << ", floor " << floor << ": "
                  << (conv.passed ? "ok" : "below") << ")\n";
        if (!conv.passed) std::cerr << "warning: " << conv.diagnostic << "\n";
      }
      return code;
    }
    if (*det_cmd) {
      const fs::path in = in_dir.empty() ? fs::path(out_dir) : fs::path(in_dir);
      const fs::path out = det_cmd->count("--out") ? fs::path(out_dir) : in;
      DetectionOptions opt;
      opt.alpha = parse_quantile_level(alpha_label);
      opt.excursion = excursion;
      for (std::size_t tau : taus) {
        const TbmeCurve curve = io::read_curve(in / io::curve_file_name(tau));
        const ReferenceBands bands = io::read_bands(in / io::reference_file_name(tau));
        const DetectionReport report = detect(curve, bands, opt);
        const auto path = io::write_report(report, out / io::detection_file_name(tau));
        std::cout << "tau=" << tau << ": " << report.signals.size() << " signal(s)\n";
        for (const auto& s : report.signals) {
          std::cout << "  days " << s.onset_window_end << "-" << s.offset_window_end
                    << "  L_s=" << s.length << "  L_e~" << s.residual_length << "  "
                    << verdict_name(s.severity) << "\n";
        }
        std::cout << "wrote " << path.string() << "\n";
      }
      return 0;
    }
    if (*post_cmd) {
      auto [ens, obs] = io::load_dataset(data.ensemble, data.obs, data.sigma);
      const LogLikTable table = gauss_log_terms(ens, obs);
      const std::size_t tau = taus.front();
      const bool has_mvg = ens.parameter_index("theta_s") && ens.parameter_index("alpha") &&
                           ens.parameter_index("n") && ens.parameter_index("K_sat") &&
                           ens.parameter_index("l");
      for (std::size_t j : windows) {
        const PosteriorSnapshot snap = posterior_snapshot(table, ens, j, tau);
        const fs::path path = io::write_posterior(
            snap, ens, fs::path(out_dir) / ("posterior_w" + std::to_string(j) + ".csv"));
        std::cout << "wrote " << path.string() << " (ESS " << snap.ess << ")\n";
        if (has_mvg) {
          const auto grid = default_head_grid();
          io::write_curve_bands(curve_bands(snap, ens, grid),
                                fs::path(out_dir) / ("wrc_w" + std::to_string(j) + ".csv"));
        }
      }
      return 0;
    }
    if (*run_cmd) {
      RunConfig cfg = config_path.empty() ? RunConfig{} : load_run_config(config_path);
      if (run_cmd->count("--tau")) cfg.tau_list = taus;
      if (data.sigma) cfg.sigma = data.sigma;
      if (run_cmd->count("--replicates")) cfg.n_replicates = replicates;
      if (run_cmd->count("--seed")) cfg.seed = seed;
      if (run_cmd->count("--alpha")) cfg.alpha = parse_quantile_level(alpha_label);
      if (min_ess) cfg.min_ess = min_ess;
      if (perturb) cfg.perturb_reference = true;
      if (excursion) cfg.excursion = true;
      if (run_cmd->count("--workers")) cfg.workers = workers;
      if (run_cmd->count("--out")) cfg.out_dir = out_dir;
      if (!data.ensemble.empty()) cfg.ensemble_path = data.ensemble;
      if (!data.obs.empty()) cfg.observations_path = data.obs;
      if (!run_case.empty()) {
        CaseConfig c;
        c.workers = resolve_workers(cfg.workers);
        if (cfg.sigma) c.sigma = *cfg.sigma;
        const CaseId id = parse_case(run_case);
        run_synth(id, c, cfg.out_dir);
        const fs::path dir = cfg.out_dir / ("case_" + std::string(case_name(id)));
        cfg.ensemble_path = dir / io::kPredictionsFile;
        cfg.observations_path = dir / io::kObservationsFile;
      }
      if (cfg.ensemble_path.empty() || cfg.observations_path.empty()) {
        throw ValidationError("run needs --ensemble and --obs, --case, or --config");
      }
      return report_manifest(run_pipeline(cfg));
    }
    if (*val_cmd) {
      PredictionEnsemble ens;
      if (!data.obs.empty()) {
        auto loaded = io::load_dataset(data.ensemble, data.obs, data.sigma);
        ens = std::move(loaded.first);
        std::cout << "observations: " << loaded.second.size() << " steps ok\n";
      } else {
        const fs::path dir = fs::path(data.ensemble).parent_path();
        std::optional<fs::path> params;
        std::optional<fs::path> bounds;
        if (fs::exists(dir / io::kParametersFile)) params = dir / io::kParametersFile;
        if (params && fs::exists(dir / io::kBoundsFile)) bounds = dir / io::kBoundsFile;
        ens = io::load_ensemble(data.ensemble, params, bounds);
      }
      std::cout << "ensemble: " << ens.n_mc() << " members x " << ens.n_steps()
                << " steps, " << ens.n_params() << " parameters ok\n";
      if (!validate_forcing.empty()) {
        const ForcingSeries f = io::load_forcing(validate_forcing);
        std::cout << "forcing: " << f.size() << " days ok\n";
      }
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::io);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(ErrorKind::numerical);
  }
  return 0;
}
