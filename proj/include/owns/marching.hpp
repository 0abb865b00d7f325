#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "owns/filters.hpp"
#include "owns/params.hpp"
#include "owns/spectral.hpp"
#include "owns/system.hpp"

namespace owns {

// ===== spatial marching with recursion-parameter tracking =====

/// Stations along the marching coordinate. The builder may vary slowly with
/// the station index; dimensions must stay constant (characteristic counts
/// may change and trigger a re-greedy).
struct StationSequence {
    RVec x_grid;                                      // strictly increasing
    std::function<OperatorBuilder(int)> builder_at;   // per-station system
    Vec inlet_state;                                  // characteristic variables
    std::function<Vec(int)> forcing_at;               // optional physical forcing
    cxd s{};                                          // Laplace parameter of the march
};

enum class FilterFlavor { Exact, OwnsP, OwnsR };
enum class XiStrategy { GreedyTrack, GreedyEachStation, FixedXi, HeuristicFixed };

struct StepScheme {
    int substeps = 1;                  // implicit-midpoint substeps per station
    bool reproject_state = false;      // re-apply the filter to the state each step
};

struct MarchOptions {
    FilterFlavor flavor = FilterFlavor::Exact;
    XiStrategy strategy = XiStrategy::GreedyTrack;
    int n_beta = 8;
    GreedyOptions greedy;
    HeuristicConfig heuristic;
    std::optional<RecursionParamSet> fixed_xi;
    cxd c{1.0, 0.0};
    StepScheme step;
    int amplitude_var = 1;             // physical variable index for A(x)
    bool with_objectives = false;      // adds per-station J columns (extra eigs)
    double blowup_factor = 1e12;
};

struct StationRecord {
    double x = 0.0;
    bool refreshed = false;            // full greedy re-selection happened here
    double j_ownsp = std::numeric_limits<double>::quiet_NaN();
    double j_ownsr = std::numeric_limits<double>::quiet_NaN();
    double wall_ms = 0.0;
    RecursionParamSet xi;              // empty for flavor == Exact
};

struct CostLog {
    double wall_ms_total = 0.0;
    std::uint64_t linear_solves = 0;
    std::uint64_t dense_eigs_selection = 0;   // eigs spent on selection/tracking
};

struct MarchResult {
    std::vector<Vec> states;           // per-station, characteristic variables
    RVec amplitude;                    // A(x): max-abs of the designated variable
    RVec n_factor_running;
    double n_factor = 0.0;
    std::vector<StationRecord> xi_log;
    CostLog cost_log;
    std::string integrator_note;
};

struct TrackResult {
    RecursionParamSet xi;
    bool refreshed = false;            // greedy re-selection was needed
    bool warned = false;               // nearest-eigenvalue update failed first
};

/// Parameter tracking across one station: counts unchanged -> each beta moves
/// to the nearest eigenvalue of the new M; otherwise greedy from scratch.
TrackResult track_params(const RecursionParamSet& xi_prev, const OperatorBuilder& builder_new,
                         cxd s, std::pair<int, int> counts_prev, std::pair<int, int> counts_new,
                         int n_beta, const GreedyOptions& greedy_opts);

/// March d phi'/dx = Filter[M phi' + g] across the stations (implicit
/// midpoint; filter applied to the right-hand side once per step).
/// complement = true marches the complement equation with [I - Filter]
/// (consistency checks of the exact projection only).
MarchResult march(const StationSequence& seq, const MarchOptions& opts, bool complement = false);

/// N = max_x ln(A(x) / A(x0)). Throws NonpositiveAmplitude.
double n_factor(const RVec& amplitudes, const RVec& x_grid);

}  // namespace owns
