#include "fleetsense/selection.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "fleetsense/entropy.hpp"
#include "fleetsense/rng.hpp"

namespace fleetsense {

std::string to_string(Strategy s) {
    switch (s) {
    case Strategy::RA: return "ra";
    case Strategy::TSUB: return "tsub";
    case Strategy::OptiFleet: return "optifleet";
    case Strategy::ImprovedOptiFleet: return "improved";
    case Strategy::Exact: return "exact";
    }
    return "optifleet";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "ra") return Strategy::RA;
    if (s == "tsub") return Strategy::TSUB;
    if (s == "optifleet") return Strategy::OptiFleet;
    if (s == "improved") return Strategy::ImprovedOptiFleet;
    if (s == "exact") return Strategy::Exact;
    throw ConfigError("unknown strategy '" + s + "' (expected ra|tsub|optifleet|improved|exact)");
}

void SelectionProblem::validate() const {
    if (!model) throw LogicError("selection problem has no visit model");
    if (!weights) throw LogicError("selection problem has no weight field");
    if (!(budget > 0.0)) throw ValidationError("budget must be positive");
    if (!(tsub_beta > 0.0)) throw ValidationError("tsub_beta must be positive");
    if (weights->w.size() != model->layer_size())
        throw DimensionError("weight field does not match the model's grid");
}

namespace {

struct GreedyFrame {
    const VisitModel& m;
    const Layer& w;
    FleetSelection out;
    Layer P;
    std::vector<std::uint8_t> taken;
    double remaining;

    explicit GreedyFrame(const SelectionProblem& p)
        : m(*p.model), w(p.weights->w), P(Layer::Zero(p.model->layer_size())),
          taken(static_cast<std::size_t>(p.model->n_vehicles()), 0), remaining(p.budget) {
        out.strategy_tag = to_string(p.strategy);
        out.seed = p.rng_seed;
    }

    void accept(int v, double score, double gain) {
        out.selected.push_back(m.vehicle_ids[static_cast<std::size_t>(v)]);
        out.selected_index.push_back(v);
        out.per_step_score.push_back(score);
        out.per_step_gain.push_back(gain);
        out.per_step_cost.push_back(m.cost[static_cast<std::size_t>(v)]);
        out.total_cost += m.cost[static_cast<std::size_t>(v)];
        remaining -= m.cost[static_cast<std::size_t>(v)];
        taken[static_cast<std::size_t>(v)] = 1;
        incremental_coverage_inplace(P, m.q, v);
    }

    FleetSelection finish() {
        const Layer scratch =
            coverage_probability(m.q, out.selected_index, m.layer_size());
        out.final_utility = sensing_utility(scratch, w);
        if (out.selected.empty() && out.status == "ok")
            out.status = "empty selection: no affordable vehicle";
        return std::move(out);
    }
};

FleetSelection greedy_optifleet_naive(const SelectionProblem& p) {
    GreedyFrame fr(p);
    const int V = fr.m.n_vehicles();
    for (;;) {
        int best_v = -1;
        double best_score = 0.0, best_gain = 0.0;
        for (int v = 0; v < V; ++v) {
            if (fr.taken[static_cast<std::size_t>(v)] ||
                fr.m.cost[static_cast<std::size_t>(v)] > fr.remaining)
                continue;
            const double gain = marginal_gain(fr.P, fr.m.q, v, fr.w);
            ++fr.out.gain_evaluations;
            const double score = gain / fr.m.cost[static_cast<std::size_t>(v)];
            if (best_v < 0 || score > best_score) {
                best_v = v;
                best_score = score;
                best_gain = gain;
            }
        }
        if (best_v < 0) break;
        if (best_gain <= 0.0 && !p.spend_full_budget) break;
        fr.accept(best_v, best_score, best_gain);
    }
    return fr.finish();
}

// CELF: stale upper bounds in a max-heap, re-evaluating only the top entry.
// Valid under submodularity; produces the same picks (ids and order) as the
// naive loop, including ties, because scores come from the same function and
// the heap breaks ties by smaller vehicle id.
FleetSelection greedy_optifleet_lazy(const SelectionProblem& p) {
    GreedyFrame fr(p);
    const int V = fr.m.n_vehicles();

    struct Entry {
        double score;
        double gain;
        int v;
        int eval_step;
    };
    struct Cmp {
        bool operator()(const Entry& a, const Entry& b) const {
            if (a.score != b.score) return a.score < b.score;
            return a.v > b.v;
        }
    };
    std::priority_queue<Entry, std::vector<Entry>, Cmp> heap;

    for (int v = 0; v < V; ++v) {
        if (fr.m.cost[static_cast<std::size_t>(v)] > fr.remaining) continue;
        const double gain = marginal_gain(fr.P, fr.m.q, v, fr.w);
        ++fr.out.gain_evaluations;
        heap.push({gain / fr.m.cost[static_cast<std::size_t>(v)], gain, v, 0});
    }

    int step = 0;
    while (!heap.empty()) {
        Entry top = heap.top();
        heap.pop();
        if (fr.m.cost[static_cast<std::size_t>(top.v)] > fr.remaining) continue;
        if (top.eval_step == step) {
            if (top.gain <= 0.0 && !p.spend_full_budget) break;
            fr.accept(top.v, top.score, top.gain);
            ++step;
        } else {
            const double gain = marginal_gain(fr.P, fr.m.q, top.v, fr.w);
            ++fr.out.gain_evaluations;
            heap.push({gain / fr.m.cost[static_cast<std::size_t>(top.v)], gain, top.v, step});
        }
    }
    return fr.finish();
}

} // namespace

FleetSelection select_optifleet(const SelectionProblem& p) {
    return p.lazy ? greedy_optifleet_lazy(p) : greedy_optifleet_naive(p);
}

FleetSelection select_improved_optifleet(const SelectionProblem& p) {
    GreedyFrame fr(p);
    const int V = fr.m.n_vehicles();
    for (;;) {
        int best_v = -1;
        double best_score = 0.0, best_entropy = 0.0;
        for (int v = 0; v < V; ++v) {
            if (fr.taken[static_cast<std::size_t>(v)] ||
                fr.m.cost[static_cast<std::size_t>(v)] > fr.remaining)
                continue;
            const double h = effective_entropy(fr.m.q, v, fr.P, fr.w);
            ++fr.out.gain_evaluations;
            const double score = h / fr.m.cost[static_cast<std::size_t>(v)];
            if (best_v < 0 || score > best_score) {
                best_v = v;
                best_score = score;
                best_entropy = h;
            }
        }
        if (best_v < 0) break;
        if (best_entropy <= 0.0 && !p.spend_full_budget) break;
        const double gain = marginal_gain(fr.P, fr.m.q, best_v, fr.w);
        fr.accept(best_v, best_score, gain);
    }
    return fr.finish();
}

FleetSelection select_tsub(const SelectionProblem& p) {
    GreedyFrame fr(p);
    const int V = fr.m.n_vehicles();
    // xi(n) = n^beta, memoized; a vehicle's contribution at a cell it visits
    // is xi(N+1) - xi(N) where N counts distinct selected visitors
    std::vector<double> xi(static_cast<std::size_t>(V) + 2, 0.0);
    for (std::size_t n = 0; n < xi.size(); ++n)
        xi[n] = std::pow(static_cast<double>(n), p.tsub_beta);
    Eigen::ArrayXi visitors = Eigen::ArrayXi::Zero(fr.m.layer_size());

    std::vector<double> terms;
    for (;;) {
        int best_v = -1;
        double best_score = 0.0, best_gain_t = 0.0;
        for (int v = 0; v < V; ++v) {
            if (fr.taken[static_cast<std::size_t>(v)] ||
                fr.m.cost[static_cast<std::size_t>(v)] > fr.remaining)
                continue;
            terms.clear();
            for (SparseLayers::InnerIterator it(fr.m.q, v); it; ++it) {
                const Index s = it.row();
                const auto n = static_cast<std::size_t>(visitors[s]);
                terms.push_back(fr.w[s] * (xi[n + 1] - xi[n]));
            }
            const double gain_t = pairwise_sum(terms);
            ++fr.out.gain_evaluations;
            const double score = gain_t / fr.m.cost[static_cast<std::size_t>(v)];
            if (best_v < 0 || score > best_score) {
                best_v = v;
                best_score = score;
                best_gain_t = gain_t;
            }
        }
        if (best_v < 0) break;
        if (best_gain_t <= 0.0 && !p.spend_full_budget) break;
        const double gain = marginal_gain(fr.P, fr.m.q, best_v, fr.w);
        for (SparseLayers::InnerIterator it(fr.m.q, best_v); it; ++it) ++visitors[it.row()];
        fr.accept(best_v, best_score, gain);
    }
    return fr.finish();
}

FleetSelection select_random(const SelectionProblem& p) {
    GreedyFrame fr(p);
    const int V = fr.m.n_vehicles();
    std::vector<int> order(static_cast<std::size_t>(V));
    for (int v = 0; v < V; ++v) order[static_cast<std::size_t>(v)] = v;
    Rng rng(p.rng_seed);
    rng.shuffle(order);
    for (int v : order) {
        if (fr.m.cost[static_cast<std::size_t>(v)] > fr.remaining) continue;
        const double gain = marginal_gain(fr.P, fr.m.q, v, fr.w);
        fr.accept(v, 0.0, gain);
    }
    return fr.finish();
}

namespace {

struct ExactSearch {
    const VisitModel& m;
    const Layer& w;
    double budget = 0.0;
    Layer P;
    std::vector<int> current{};
    std::vector<int> best{};
    double best_utility = 0.0;
    bool have_best = false;

    void run(int v, double spent, double utility) {
        if (v == m.n_vehicles()) {
            // ties: fewer vehicles first (zero-gain members are dropped),
            // then the lexicographically smallest id set
            const bool better =
                !have_best || utility > best_utility ||
                (utility == best_utility &&
                 (current.size() < best.size() ||
                  (current.size() == best.size() && current < best)));
            if (better) {
                best = current;
                best_utility = utility;
                have_best = true;
            }
            return;
        }
        const double c = m.cost[static_cast<std::size_t>(v)];
        if (spent + c <= budget) {
            std::vector<std::pair<Index, double>> undo;
            const double gain = marginal_gain(P, m.q, v, w);
            for (SparseLayers::InnerIterator it(m.q, v); it; ++it) {
                undo.emplace_back(it.row(), P[it.row()]);
                P[it.row()] = 1.0 - (1.0 - P[it.row()]) * (1.0 - it.value());
            }
            current.push_back(v);
            run(v + 1, spent + c, utility + gain);
            current.pop_back();
            for (const auto& [s, old] : undo) P[s] = old;
        }
        run(v + 1, spent, utility);
    }
};

} // namespace

FleetSelection select_exact(const SelectionProblem& p) {
    const int V = p.model->n_vehicles();
    if (V > p.max_exact_vehicles)
        throw ValidationError("exact solver capped at " + std::to_string(p.max_exact_vehicles) +
                              " vehicles, got " + std::to_string(V));
    ExactSearch search{.m = *p.model,
                       .w = p.weights->w,
                       .budget = p.budget,
                       .P = Layer::Zero(p.model->layer_size())};
    search.run(0, 0.0, 0.0);

    FleetSelection out;
    out.strategy_tag = to_string(Strategy::Exact);
    out.seed = p.rng_seed;
    Layer P = Layer::Zero(p.model->layer_size());
    for (int v : search.best) {
        out.selected.push_back(p.model->vehicle_ids[static_cast<std::size_t>(v)]);
        out.selected_index.push_back(v);
        const double gain = marginal_gain(P, p.model->q, v, p.weights->w);
        out.per_step_gain.push_back(gain);
        out.per_step_cost.push_back(p.model->cost[static_cast<std::size_t>(v)]);
        out.per_step_score.push_back(gain / p.model->cost[static_cast<std::size_t>(v)]);
        out.total_cost += p.model->cost[static_cast<std::size_t>(v)];
        incremental_coverage_inplace(P, p.model->q, v);
    }
    const Layer scratch = coverage_probability(p.model->q, out.selected_index,
                                               p.model->layer_size());
    out.final_utility = sensing_utility(scratch, p.weights->w);
    if (out.selected.empty()) out.status = "empty selection: no affordable vehicle";
    return out;
}

FleetSelection select(const SelectionProblem& p) {
    p.validate();
    switch (p.strategy) {
    case Strategy::RA: return select_random(p);
    case Strategy::TSUB: return select_tsub(p);
    case Strategy::OptiFleet: return select_optifleet(p);
    case Strategy::ImprovedOptiFleet: return select_improved_optifleet(p);
    case Strategy::Exact: return select_exact(p);
    }
    throw LogicError("unreachable strategy");
}

} // namespace fleetsense
