#pragma once

#include <span>
#include <string>
#include <vector>

#include "fleetsense/selection.hpp"

namespace fleetsense {

// Per-(g,t) mean concentration for some vehicle subset, with an observation
// mask. Cells nobody in the subset measured are unobserved, not imputed.
struct ObservedField {
    Layer value;
    Layer count; // reading counts, for pooled metrics
    std::vector<std::uint8_t> observed;
    Index n_observed = 0;
};

// subset given as indices into agg.vehicle_ids; order does not matter
ObservedField estimate_field(std::span<const int> vehicles, const ReadingAggregate& agg);
ObservedField full_fleet_field(const ReadingAggregate& agg);

enum class MapeMode { PerCell, Pooled };

struct Metrics {
    bool defined = false; // false when no jointly observed cell exists
    double rmse = 0.0;
    double mape = 0.0;           // percent; over truth > 0 cells only
    double coverage_ratio = 0.0; // |both observed| / |truth observed|
    Index joint_cells = 0;
    Index truth_cells = 0;
    Index mape_cells = 0;      // joint cells with truth > 0
    Index truth_zero_cells = 0; // joint cells excluded from MAPE
};

Metrics score(const ObservedField& estimate, const ObservedField& truth,
              MapeMode mode = MapeMode::PerCell);

struct CellMape {
    int g;
    int t;
    double mape_percent;
};
std::vector<CellMape> per_cell_mape(const ObservedField& estimate, const ObservedField& truth,
                                    const GridSpec& grid);

struct EvaluationReport {
    std::string pollutant;
    int fleet_size = 0;
    std::string strategy_tag;
    double utility = 0.0; // f(S) of the evaluated selection
    Metrics metrics;
};

EvaluationReport evaluate_selection(const VisitModel& model, const WeightField& weights,
                                    const FleetSelection& selection, const ReadingAggregate& agg,
                                    MapeMode mode = MapeMode::PerCell);

// One (strategy, size) cell of the sweep table; deterministic strategies run
// once, RA is averaged over the seed list (mean +/- sd).
struct SweepRow {
    std::string strategy;
    int fleet_size = 0;
    int n_runs = 0;
    double utility_mean = 0.0, utility_sd = 0.0;
    double rmse_mean = 0.0, rmse_sd = 0.0;
    double mape_mean = 0.0, mape_sd = 0.0;
    double coverage_mean = 0.0;
};

struct SweepResult {
    std::string pollutant;
    std::vector<SweepRow> rows;
    std::vector<std::string> notes;
};

SweepResult sweep_fleet_sizes(const VisitModel& model, const WeightField& weights,
                              const ReadingAggregate& agg, std::span<const int> sizes,
                              std::span<const Strategy> strategies,
                              std::span<const std::uint64_t> seeds, double tsub_beta = 1.85,
                              MapeMode mode = MapeMode::PerCell);

struct AblationRow {
    WeightVariant variant = WeightVariant::Uniform;
    SweepRow sweep;
    double mape_delta_vs_uniform = 0.0; // mean MAPE minus the uniform variant's
};

struct AblationResult {
    std::string pollutant;
    Strategy strategy = Strategy::OptiFleet;
    std::vector<AblationRow> rows;
    std::vector<std::string> notes;
};

AblationResult run_ablation(const VisitModel& model,
                            std::span<const std::pair<WeightVariant, WeightField>> variants,
                            const ReadingAggregate& agg, std::span<const int> sizes,
                            std::span<const std::uint64_t> seeds,
                            Strategy strategy = Strategy::OptiFleet,
                            MapeMode mode = MapeMode::PerCell);

} // namespace fleetsense
