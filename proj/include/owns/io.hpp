#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "owns/diagnostics.hpp"
#include "owns/marching.hpp"
#include "owns/params.hpp"
#include "owns/spectral.hpp"
#include "owns/system.hpp"

namespace owns::io {

// ===== deterministic CSV / JSON artifacts =====
// CSV bodies are byte-identical for identical (config, seed); anything
// time-dependent goes to the metadata sidecar.

std::string format_double(double v);

/// (index, re_alpha, im_alpha, label, re_alpha_eta, im_alpha_eta)
void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec);

/// (j, re_beta_plus, im_beta_plus, re_beta_minus, im_beta_minus, origin)
void write_xi_csv(const std::filesystem::path& path, const RecursionParamSet& xi);
void write_xi_json(const std::filesystem::path& path, const RecursionParamSet& xi);
RecursionParamSet read_xi_json(const std::filesystem::path& path);

/// (n_beta, selector, j_ownsp_greedy..., ) convergence table rows
struct ConvergenceRow {
    int n_beta = 0;
    std::string selector;
    double j_ownsp = 0.0;
    double j_ownsr = 0.0;
    double j_plus_max = 0.0;
    double j_minus_max = 0.0;
};
void write_convergence_csv(const std::filesystem::path& path, const std::vector<ConvergenceRow>& rows);

/// `with_timings` controls whether measured wall_ms values appear in the CSV
/// body; the default keeps bodies byte-identical across reruns (timings then
/// live only in the metadata sidecar).
void write_study_csv(const std::filesystem::path& path, const std::vector<ErrorStudyRecord>& records,
                     bool with_timings = false);

void write_march_csv(const std::filesystem::path& path, const MarchResult& result,
                     bool with_timings = false);

// ===== config files =====

/// Strict-key JSON object check: unknown keys are a BadConfig error,
/// missing required keys too. `ctx` names the object in error messages.
void require_keys(const nlohmann::json& j, const std::vector<std::string>& required,
                  const std::vector<std::string>& optional_keys, const std::string& ctx);

struct SystemConfig {
    OperatorBuilder builder;
    std::string description;
    /// For testbed-backed systems: the same testbed with its base velocity
    /// interpolated toward march.u_ramp_to (fraction in [0, 1]); null otherwise.
    std::function<OperatorBuilder(double frac, double u_to)> builder_at_fraction;
};

/// System + discretization from a config JSON object (testbed reference or
/// explicit matrices). Validates schema_version.
SystemConfig parse_system(const nlohmann::json& j);

struct StudyConfig {
    int schema_version = 1;
    SystemConfig system;
    cxd s{};
    std::vector<double> omega_t;
    // selector settings
    std::string selector_kind = "greedy";    // greedy | heuristic | minimal | both
    std::uint64_t seed = 1;
    int n_starts = 8;
    std::optional<double> exclude_im_above;
    HeuristicConfig heuristic;
    // grids and method
    std::vector<int> n_beta_grid;
    std::string method = "ownsp";            // ownsp | ownsr | both
    cxd c{1.0, 0.0};
    int n_trials = 20;
    // marching
    int stations = 0;
    double x0 = 0.0, x1 = 1.0;
    int substeps = 1;
    int amplitude_var = 1;
    std::string strategy = "track";
    std::string flavor = "ownsp";            // exact | ownsp | ownsr
    bool with_objectives = true;
    std::optional<double> u_ramp_to;         // testbed u varied linearly to this value
};

StudyConfig load_config(const std::filesystem::path& path);

/// Machine-readable error artifact {"error": {"type", "message"}}.
std::string error_json(const std::string& type, const std::string& message);

void write_metadata(const std::filesystem::path& path, const std::string& command,
                    const std::filesystem::path& config_path, std::uint64_t seed, int threads);

}  // namespace owns::io
