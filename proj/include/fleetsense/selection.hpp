#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fleetsense/coverage.hpp"
#include "fleetsense/visit_model.hpp"
#include "fleetsense/weights.hpp"

namespace fleetsense {

enum class Strategy { RA, TSUB, OptiFleet, ImprovedOptiFleet, Exact };

std::string to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

struct SelectionProblem {
    const VisitModel* model = nullptr;
    const WeightField* weights = nullptr;
    double budget = 0.0;
    Strategy strategy = Strategy::OptiFleet;
    std::uint64_t rng_seed = 0;
    double tsub_beta = 1.85;
    // keep adding zero-score vehicles until the budget is exhausted, the
    // literal reading of "until the total budget B is exhausted"
    bool spend_full_budget = false;
    bool lazy = false; // CELF accelerator (OptiFleet only)
    int max_exact_vehicles = 20;

    void validate() const;
};

struct FleetSelection {
    std::vector<std::string> selected; // ids in pick order
    std::vector<int> selected_index;   // same order, indices into the model
    std::vector<double> per_step_gain; // marginal utility gain (coverage units)
    std::vector<double> per_step_score; // the per-unit-cost argmax score used
    std::vector<double> per_step_cost;
    double total_cost = 0.0;
    double final_utility = 0.0; // f(S), recomputed from scratch
    std::string strategy_tag;
    std::uint64_t seed = 0;
    std::string status = "ok";
    std::int64_t gain_evaluations = 0; // instrumentation for the lazy accelerator
};

FleetSelection select(const SelectionProblem& problem);

FleetSelection select_optifleet(const SelectionProblem& problem);
FleetSelection select_improved_optifleet(const SelectionProblem& problem);
FleetSelection select_tsub(const SelectionProblem& problem);
FleetSelection select_random(const SelectionProblem& problem);
// exhaustive subset search; refuses fleets above problem.max_exact_vehicles
FleetSelection select_exact(const SelectionProblem& problem);

} // namespace fleetsense
