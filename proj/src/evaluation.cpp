#include "fleetsense/evaluation.hpp"

#include <algorithm>
#include <cmath>

#include "fleetsense/summation.hpp"

namespace fleetsense {

ObservedField estimate_field(std::span<const int> vehicles, const ReadingAggregate& agg) {
    ObservedField out;
    out.value = Layer::Zero(agg.layer_size);
    out.count = Layer::Zero(agg.layer_size);
    out.observed.assign(static_cast<std::size_t>(agg.layer_size), 0);

    // accumulate in canonical vehicle order so the estimate depends only on
    // the member set, not the pick order
    std::vector<int> members(vehicles.begin(), vehicles.end());
    std::sort(members.begin(), members.end());
    Layer sum = Layer::Zero(agg.layer_size);
    for (int v : members) {
        const auto& pv = agg.per_vehicle[static_cast<std::size_t>(v)];
        for (std::size_t i = 0; i < pv.idx.size(); ++i) {
            sum[static_cast<Index>(pv.idx[i])] += pv.sum[i];
            out.count[static_cast<Index>(pv.idx[i])] += pv.count[i];
        }
    }
    for (Index s = 0; s < agg.layer_size; ++s) {
        if (out.count[s] > 0) {
            out.value[s] = sum[s] / out.count[s];
            out.observed[static_cast<std::size_t>(s)] = 1;
            ++out.n_observed;
        }
    }
    return out;
}

ObservedField full_fleet_field(const ReadingAggregate& agg) {
    std::vector<int> all(agg.vehicle_ids.size());
    for (std::size_t v = 0; v < all.size(); ++v) all[v] = static_cast<int>(v);
    return estimate_field(all, agg);
}

Metrics score(const ObservedField& estimate, const ObservedField& truth, MapeMode mode) {
    if (estimate.value.size() != truth.value.size())
        throw DimensionError("estimate and truth fields live on different grids");
    Metrics m;
    m.truth_cells = truth.n_observed;
    std::vector<double> sq, ape, ape_weight;
    for (Index s = 0; s < truth.value.size(); ++s) {
        if (!truth.observed[static_cast<std::size_t>(s)] ||
            !estimate.observed[static_cast<std::size_t>(s)])
            continue;
        ++m.joint_cells;
        const double d = estimate.value[s] - truth.value[s];
        sq.push_back(d * d);
        if (truth.value[s] > 0.0) {
            ++m.mape_cells;
            ape.push_back(std::abs(d) / truth.value[s]);
            ape_weight.push_back(truth.count[s]);
        } else {
            ++m.truth_zero_cells;
        }
    }
    if (m.joint_cells == 0) return m; // undefined-metrics status
    m.defined = true;
    m.rmse = std::sqrt(pairwise_sum(sq) / static_cast<double>(m.joint_cells));
    if (m.mape_cells > 0) {
        if (mode == MapeMode::PerCell) {
            m.mape = 100.0 * pairwise_sum(ape) / static_cast<double>(m.mape_cells);
        } else {
            std::vector<double> weighted(ape.size());
            for (std::size_t i = 0; i < ape.size(); ++i) weighted[i] = ape[i] * ape_weight[i];
            m.mape = 100.0 * pairwise_sum(weighted) / pairwise_sum(ape_weight);
        }
    }
    m.coverage_ratio = m.truth_cells > 0
                           ? static_cast<double>(m.joint_cells) / static_cast<double>(m.truth_cells)
                           : 0.0;
    return m;
}

std::vector<CellMape> per_cell_mape(const ObservedField& estimate, const ObservedField& truth,
                                    const GridSpec& grid) {
    std::vector<CellMape> out;
    const int T = grid.n_intervals();
    for (Index s = 0; s < truth.value.size(); ++s) {
        if (!truth.observed[static_cast<std::size_t>(s)] ||
            !estimate.observed[static_cast<std::size_t>(s)] || !(truth.value[s] > 0.0))
            continue;
        const double ape =
            100.0 * std::abs(estimate.value[s] - truth.value[s]) / truth.value[s];
        out.push_back({static_cast<int>(s / T), static_cast<int>(s % T), ape});
    }
    return out;
}

EvaluationReport evaluate_selection(const VisitModel& model, const WeightField& weights,
                                    const FleetSelection& selection, const ReadingAggregate& agg,
                                    MapeMode mode) {
    EvaluationReport rep;
    rep.pollutant = agg.pollutant;
    rep.fleet_size = static_cast<int>(selection.selected.size());
    rep.strategy_tag = selection.strategy_tag;
    // recomputed against the evaluation-time weights, which may differ from
    // the field the selection was produced under
    const Layer P =
        coverage_probability(model.q, selection.selected_index, model.layer_size());
    rep.utility = sensing_utility(P, weights.w);
    const ObservedField est = estimate_field(selection.selected_index, agg);
    const ObservedField truth = full_fleet_field(agg);
    rep.metrics = score(est, truth, mode);
    return rep;
}

namespace {

struct Welford {
    int n = 0;
    double mean = 0.0, m2 = 0.0;
    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double sd() const { return n > 1 ? std::sqrt(m2 / (n - 1)) : 0.0; }
};

} // namespace

SweepResult sweep_fleet_sizes(const VisitModel& model, const WeightField& weights,
                              const ReadingAggregate& agg, std::span<const int> sizes,
                              std::span<const Strategy> strategies,
                              std::span<const std::uint64_t> seeds, double tsub_beta,
                              MapeMode mode) {
    if (!model.uniform_costs())
        throw ValidationError("fleet-size sweep equates size with budget and requires uniform costs");
    const double unit_cost = model.cost.empty() ? 1.0 : model.cost.front();
    const ObservedField truth = full_fleet_field(agg);

    SweepResult result;
    result.pollutant = agg.pollutant;
    for (Strategy strat : strategies) {
        for (int size : sizes) {
            if (size > model.n_vehicles()) {
                result.notes.push_back("size " + std::to_string(size) + " exceeds fleet (" +
                                       std::to_string(model.n_vehicles()) + " vehicles), skipped");
                continue;
            }
            SweepRow row;
            row.strategy = to_string(strat);
            row.fleet_size = size;
            Welford utility, rmse, mape;
            double coverage = 0.0;
            const std::size_t runs = strat == Strategy::RA ? seeds.size() : 1;
            for (std::size_t r = 0; r < runs; ++r) {
                SelectionProblem prob;
                prob.model = &model;
                prob.weights = &weights;
                prob.budget = unit_cost * size;
                prob.strategy = strat;
                prob.rng_seed = strat == Strategy::RA ? seeds[r] : 0;
                prob.tsub_beta = tsub_beta;
                const FleetSelection sel = select(prob);
                const ObservedField est = estimate_field(sel.selected_index, agg);
                const Metrics m = score(est, truth, mode);
                utility.add(sel.final_utility);
                if (m.defined) {
                    rmse.add(m.rmse);
                    mape.add(m.mape);
                    coverage += m.coverage_ratio;
                }
            }
            row.n_runs = utility.n;
            row.utility_mean = utility.mean;
            row.utility_sd = utility.sd();
            row.rmse_mean = rmse.mean;
            row.rmse_sd = rmse.sd();
            row.mape_mean = mape.mean;
            row.mape_sd = mape.sd();
            row.coverage_mean = rmse.n > 0 ? coverage / rmse.n : 0.0;
            result.rows.push_back(row);
        }
    }
    return result;
}

AblationResult run_ablation(const VisitModel& model,
                            std::span<const std::pair<WeightVariant, WeightField>> variants,
                            const ReadingAggregate& agg, std::span<const int> sizes,
                            std::span<const std::uint64_t> seeds, Strategy strategy,
                            MapeMode mode) {
    AblationResult result;
    result.pollutant = agg.pollutant;
    result.strategy = strategy;
    const Strategy strategies[] = {strategy};

    std::vector<double> uniform_mape; // aligned with row order of the sweep
    for (const auto& [variant, field] : variants) {
        SweepResult sweep =
            sweep_fleet_sizes(model, field, agg, sizes, strategies, seeds, 1.85, mode);
        for (std::size_t i = 0; i < sweep.rows.size(); ++i) {
            AblationRow row;
            row.variant = variant;
            row.sweep = sweep.rows[i];
            if (variant == WeightVariant::Uniform) {
                uniform_mape.push_back(row.sweep.mape_mean);
                row.mape_delta_vs_uniform = 0.0;
            } else if (i < uniform_mape.size()) {
                row.mape_delta_vs_uniform = row.sweep.mape_mean - uniform_mape[i];
            }
            result.rows.push_back(row);
        }
        for (auto& note : sweep.notes) result.notes.push_back(std::move(note));
    }
    return result;
}

} // namespace fleetsense
