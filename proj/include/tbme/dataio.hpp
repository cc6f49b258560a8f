#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "tbme/detection.hpp"
#include "tbme/evidence.hpp"
#include "tbme/posterior.hpp"
#include "tbme/records.hpp"
#include "tbme/reference.hpp"
#include "tbme/soilfuncs.hpp"
#include "tbme/synthlab.hpp"

namespace tbme::io {

namespace fs = std::filesystem;

inline constexpr std::string_view kPredictionsFile = "ensemble_predictions.csv";
inline constexpr std::string_view kParametersFile = "ensemble_parameters.csv";
inline constexpr std::string_view kBoundsFile = "bounds.json";
inline constexpr std::string_view kObservationsFile = "observations.csv";
inline constexpr std::string_view kForcingFile = "forcing.csv";

/// Shortest round-trip text for a double (17 significant digits).
std::string format_double(double value);

/// Writes via a temporary sibling and rename, so readers never observe a
/// partially written file.
void write_file_atomic(const fs::path& path, std::string_view content);
std::string read_file(const fs::path& path);

/// Loads predictions; parameters and bounds are optional companions.
PredictionEnsemble load_ensemble(
    const fs::path& predictions_path,
    const std::optional<fs::path>& parameters_path = std::nullopt,
    const std::optional<fs::path>& bounds_path = std::nullopt);

/// A sigma column in the file takes precedence only when no override is
/// given; one of the two is required.
ObservationSeries load_observations(const fs::path& path,
                                    std::optional<double> sigma = std::nullopt);

ForcingSeries load_forcing(const fs::path& path);

/// Loads `ensemble_path` (predictions CSV) together with the parameter and
/// bounds companions found next to it, plus the observations, and checks
/// that both describe the same number of steps.
std::pair<PredictionEnsemble, ObservationSeries> load_dataset(
    const fs::path& ensemble_path, const fs::path& observations_path,
    std::optional<double> sigma = std::nullopt);

std::vector<fs::path> save_ensemble(const PredictionEnsemble& ensemble,
                                    const fs::path& dir);
fs::path save_observations(const ObservationSeries& obs, const fs::path& path);
fs::path save_forcing(const ForcingSeries& forcing, const fs::path& path);

std::string curve_file_name(std::size_t tau);
std::string reference_file_name(std::size_t tau);
std::string detection_file_name(std::size_t tau);

fs::path write_curve(const TbmeCurve& curve, const fs::path& path);
TbmeCurve read_curve(const fs::path& path);

fs::path write_bands(const ReferenceBands& bands, const fs::path& path);
ReferenceBands read_bands(const fs::path& path);

fs::path write_report(const DetectionReport& report, const fs::path& path);
DetectionReport read_report(const fs::path& path);

fs::path write_posterior(const PosteriorSnapshot& snapshot,
                         const PredictionEnsemble& ensemble,
                         const fs::path& path);
fs::path write_curve_bands(const CurveBands& bands, const fs::path& path);

/// Writes tbme_tau<tau>.csv, reference_tau<tau>.csv and
/// detection_tau<tau>.json into out_dir; returns the written paths.
std::vector<fs::path> save_outputs(const TbmeCurve& curve,
                                   const ReferenceBands& bands,
                                   const DetectionReport& report,
                                   const fs::path& out_dir);

/// Writes a synthetic case directory: ensemble files, observations.csv,
/// forcing.csv and truth.json.
std::vector<fs::path> save_case(const CaseBundle& bundle, const fs::path& dir);

}  // namespace tbme::io
