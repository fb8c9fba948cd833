#pragma once

// Capacity solvers: the conditional-information objective for encoder-side
// probing with decoder state knowledge (projected gradient on the input
// rows, with the action distribution pinned for binary monotone costs), an
// exhaustive grid oracle, a cost-constrained Blahut-Arimoto inner solver,
// Shannon-strategy reductions for the causal and two-sided settings, the
// auxiliary-variable lower bound for the non-causal setting, and curve
// post-processing (sweeps, cutoff, concave envelope, time sharing).

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <sstream>

#include "probecap/model.hpp"
#include "probecap/optim.hpp"
#include "probecap/parallel.hpp"

namespace probecap {

enum class SolveStatus { converged, multistart_best, oracle };

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::converged: return "converged";
        case SolveStatus::multistart_best: return "multistart-best";
        case SolveStatus::oracle: return "oracle";
    }
    return "?";
}

// One Shannon-strategy letter: an encoder action plus an input plan per
// observable state symbol.
struct StrategyAtom {
    int ae = 0;
    std::vector<int> x_of_se;
};

struct SolveResult {
    double value = 0.0;         // bits
    double achieved_cost = 0.0; // E[L]
    SolveStatus status = SolveStatus::converged;
    std::vector<double> trace;

    // optimizing parts; solvers fill whichever apply
    std::vector<double> action;                // P_A (or P_Ad for the two-sided solver)
    std::vector<std::pair<int, int>> row_keys; // (se, a) key per row below
    std::vector<std::vector<double>> rows;     // P(X|se,a) or P(U|se,a)
    std::vector<StrategyAtom> strategies;      // strategy support
    std::vector<double> strategy_probs;
    std::vector<int> strategy_ad;              // owning decoder action per atom
    std::vector<int> f_table;                  // aux->input map, u major over se
    int u_size = 0;
    bool lower_bound = false;
};

struct SolveOptions {
    double tol = 1e-10;
    int max_iters = 4000;
    int multistarts = 32;
    std::uint64_t seed = 1;
    int u_cap = 0;                    // 0 = solver default
    std::int64_t strategy_cap = 262144;
    int oracle_param_cap = 6;
    int ad_grid = 41;                 // decoder-action grid points (two-sided solver)
};

inline std::vector<double> uniform_grid(double lo, double hi, int count) {
    if (count < 2) throw std::invalid_argument("uniform_grid: count must be >= 2");
    std::vector<double> g(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i)
        g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
    return g;
}

inline double u01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

namespace detail {

inline double safe_log2(double v) { return std::log2(std::max(v, 1e-300)); }

inline void check_feasible_budget(const ProbingModel& m, double gamma, const char* who) {
    if (gamma < m.cost.min_cost() - 1e-12)
        throw std::invalid_argument(std::string(who) + ": budget " + std::to_string(gamma) +
                                    " below minimum achievable cost " +
                                    std::to_string(m.cost.min_cost()));
}

// P(A=hi) pin for binary actions with strictly increasing cost. Budgets at or
// beyond the expensive action saturate at 1.
inline std::optional<std::vector<double>> pinned_action(const ProbingModel& m, double gamma) {
    if (m.Ae.size() != 2) return std::nullopt;
    double c0 = m.cost.at(0, 0), c1 = m.cost.at(1, 0);
    if (c0 == c1) return std::nullopt;
    int lo = c0 < c1 ? 0 : 1;
    int hi = 1 - lo;
    double t = (gamma - m.cost.at(lo, 0)) / (m.cost.at(hi, 0) - m.cost.at(lo, 0));
    t = std::clamp(t, 0.0, 1.0);
    std::vector<double> a(2, 0.0);
    a[static_cast<std::size_t>(hi)] = t;
    a[static_cast<std::size_t>(lo)] = 1.0 - t;
    return a;
}

// Per-state view of the encoder-side objective I(X;Y|S). The objective
// depends on the strategy only through the per-state input marginals
//   m_s(x) = sum_k weight[k][s] rows[k](x),
// so both the ascent path and the grid oracle share this workspace.
class Thm1Workspace {
public:
    Thm1Workspace(const ProbingModel& m, std::vector<double> action)
        : model_(&m), action_(std::move(action)) {
        ns_ = m.S.size();
        nx_ = m.X.size();
        ny_ = m.Y.size();
        ps_.resize(static_cast<std::size_t>(ns_));
        for (int s = 0; s < ns_; ++s) ps_[static_cast<std::size_t>(s)] = m.state.mass[static_cast<std::size_t>(s)];
        w_.assign(static_cast<std::size_t>(ns_ * nx_ * ny_), 0.0);
        for (int s = 0; s < ns_; ++s)
            for (int x = 0; x < nx_; ++x)
                for (int y = 0; y < ny_; ++y)
                    w_[idxw(s, x, y)] = m.channel_prob(x, s, y);

        for (int se = 0; se < m.Se.size(); ++se)
            for (int a = 0; a < m.Ae.size(); ++a) {
                double pa = action_[static_cast<std::size_t>(a)];
                if (pa <= 0.0) continue;
                std::vector<double> wk(static_cast<std::size_t>(ns_), 0.0);
                double reach = 0.0;
                for (int s = 0; s < ns_; ++s) {
                    double v = pa * m.encoder_probe_prob(s, a, 0, se);
                    wk[static_cast<std::size_t>(s)] = v;
                    reach += ps_[static_cast<std::size_t>(s)] * v;
                }
                if (reach < 1e-15) continue; // unreachable row, prune
                keys_.push_back({se, a});
                weight_.push_back(std::move(wk));
                reach_.push_back(reach);
            }
        if (keys_.empty())
            throw std::invalid_argument("Thm1Workspace: no reachable rows (degenerate action)");
    }

    int row_count() const { return static_cast<int>(keys_.size()); }
    int nx() const { return nx_; }
    const std::vector<std::pair<int, int>>& keys() const { return keys_; }
    const std::vector<double>& reach() const { return reach_; }
    const std::vector<double>& action() const { return action_; }

    // rows laid out flat, row k at [k*nx, (k+1)*nx)
    double eval(std::span<const double> rows, std::vector<double>* grad) const {
        const int nk = row_count();
        if (grad) std::fill(grad->begin(), grad->end(), 0.0);
        double info = 0.0;
        std::vector<double> m(static_cast<std::size_t>(nx_));
        std::vector<double> v(static_cast<std::size_t>(ny_));
        std::vector<double> d(static_cast<std::size_t>(nx_));
        for (int s = 0; s < ns_; ++s) {
            double p_s = ps_[static_cast<std::size_t>(s)];
            if (p_s <= 0.0) continue;
            std::fill(m.begin(), m.end(), 0.0);
            for (int k = 0; k < nk; ++k) {
                double wk = weight_[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
                if (wk <= 0.0) continue;
                for (int x = 0; x < nx_; ++x)
                    m[static_cast<std::size_t>(x)] += wk * rows[static_cast<std::size_t>(k * nx_ + x)];
            }
            std::fill(v.begin(), v.end(), 0.0);
            for (int x = 0; x < nx_; ++x) {
                double mx = m[static_cast<std::size_t>(x)];
                if (mx <= 0.0) continue;
                for (int y = 0; y < ny_; ++y)
                    v[static_cast<std::size_t>(y)] += mx * w_[idxw(s, x, y)];
            }
            for (int x = 0; x < nx_; ++x) {
                double dx = 0.0;
                for (int y = 0; y < ny_; ++y) {
                    double wxy = w_[idxw(s, x, y)];
                    if (wxy <= 0.0) continue;
                    dx += wxy * std::log2(wxy / std::max(v[static_cast<std::size_t>(y)], 1e-300));
                }
                d[static_cast<std::size_t>(x)] = dx;
                info += p_s * m[static_cast<std::size_t>(x)] * dx;
            }
            if (grad) {
                for (int k = 0; k < nk; ++k) {
                    double wk = weight_[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
                    if (wk <= 0.0) continue;
                    for (int x = 0; x < nx_; ++x)
                        (*grad)[static_cast<std::size_t>(k * nx_ + x)] +=
                            p_s * wk * d[static_cast<std::size_t>(x)];
                }
            }
        }
        return info;
    }

    // coefficient of P(X = x_sym) as a linear functional of the flat rows
    std::vector<double> input_marginal_coef(int x_sym) const {
        std::vector<double> coef(static_cast<std::size_t>(row_count() * nx_), 0.0);
        for (int k = 0; k < row_count(); ++k)
            coef[static_cast<std::size_t>(k * nx_ + x_sym)] = reach_[static_cast<std::size_t>(k)];
        return coef;
    }

    // per-state input marginals for a candidate
    std::vector<std::vector<double>> state_marginals(std::span<const double> rows) const {
        std::vector<std::vector<double>> out(static_cast<std::size_t>(ns_),
                                             std::vector<double>(static_cast<std::size_t>(nx_), 0.0));
        for (int s = 0; s < ns_; ++s)
            for (int k = 0; k < row_count(); ++k) {
                double wk = weight_[static_cast<std::size_t>(k)][static_cast<std::size_t>(s)];
                for (int x = 0; x < nx_; ++x)
                    out[static_cast<std::size_t>(s)][static_cast<std::size_t>(x)] +=
                        wk * rows[static_cast<std::size_t>(k * nx_ + x)];
            }
        return out;
    }

private:
    std::size_t idxw(int s, int x, int y) const {
        return (static_cast<std::size_t>(s) * nx_ + static_cast<std::size_t>(x)) * ny_ +
               static_cast<std::size_t>(y);
    }

    const ProbingModel* model_;
    std::vector<double> action_;
    int ns_ = 0, nx_ = 0, ny_ = 0;
    std::vector<double> ps_;
    std::vector<double> w_; // [s][x][y]
    std::vector<std::pair<int, int>> keys_;
    std::vector<std::vector<double>> weight_; // [row][s]
    std::vector<double> reach_;
};

inline std::vector<Halfspace> thm1_halfspaces(const ProbingModel& m, const Thm1Workspace& ws) {
    std::vector<Halfspace> hs;
    if (m.input_constraint)
        hs.push_back(Halfspace{ws.input_marginal_coef(m.input_constraint->x_symbol),
                               m.input_constraint->bound});
    return hs;
}

// Joint (action, full row table) evaluator used by the alternating fallback.
// Rows cover every (se,a) pair; unreachable rows simply carry zero weight.
class Thm1FullEval {
public:
    explicit Thm1FullEval(const ProbingModel& m) : m_(&m) {
        ns_ = m.S.size();
        nse_ = m.Se.size();
        na_ = m.Ae.size();
        nx_ = m.X.size();
        ny_ = m.Y.size();
    }

    int row_count() const { return nse_ * na_; }
    int row_of(int se, int a) const { return se * na_ + a; }

    // D_s(x) terms are shared between the value and both gradients
    double eval(std::span<const double> action, std::span<const double> rows,
                std::vector<double>* grad_rows, std::vector<double>* grad_action) const {
        const ProbingModel& m = *m_;
        if (grad_rows) std::fill(grad_rows->begin(), grad_rows->end(), 0.0);
        if (grad_action) std::fill(grad_action->begin(), grad_action->end(), 0.0);
        double info = 0.0;
        std::vector<double> mx(static_cast<std::size_t>(nx_));
        std::vector<double> v(static_cast<std::size_t>(ny_));
        std::vector<double> d(static_cast<std::size_t>(nx_));
        for (int s = 0; s < ns_; ++s) {
            double ps = m.state.mass[static_cast<std::size_t>(s)];
            if (ps <= 0.0) continue;
            std::fill(mx.begin(), mx.end(), 0.0);
            for (int a = 0; a < na_; ++a) {
                double pa = action[static_cast<std::size_t>(a)];
                if (pa <= 0.0) continue;
                for (int se = 0; se < nse_; ++se) {
                    double pse = m.encoder_probe_prob(s, a, 0, se);
                    if (pse <= 0.0) continue;
                    const int k = row_of(se, a);
                    for (int x = 0; x < nx_; ++x)
                        mx[static_cast<std::size_t>(x)] +=
                            pa * pse * rows[static_cast<std::size_t>(k * nx_ + x)];
                }
            }
            std::fill(v.begin(), v.end(), 0.0);
            for (int x = 0; x < nx_; ++x)
                for (int y = 0; y < ny_; ++y)
                    v[static_cast<std::size_t>(y)] += mx[static_cast<std::size_t>(x)] * m.channel_prob(x, s, y);
            for (int x = 0; x < nx_; ++x) {
                double dx = 0.0;
                for (int y = 0; y < ny_; ++y) {
                    double w = m.channel_prob(x, s, y);
                    if (w <= 0.0) continue;
                    dx += w * std::log2(w / std::max(v[static_cast<std::size_t>(y)], 1e-300));
                }
                d[static_cast<std::size_t>(x)] = dx;
                info += ps * mx[static_cast<std::size_t>(x)] * dx;
            }
            if (grad_rows || grad_action) {
                for (int a = 0; a < na_; ++a) {
                    double pa = action[static_cast<std::size_t>(a)];
                    for (int se = 0; se < nse_; ++se) {
                        double pse = m.encoder_probe_prob(s, a, 0, se);
                        if (pse <= 0.0) continue;
                        const int k = row_of(se, a);
                        for (int x = 0; x < nx_; ++x) {
                            double rk = rows[static_cast<std::size_t>(k * nx_ + x)];
                            double dx = d[static_cast<std::size_t>(x)];
                            if (grad_rows)
                                (*grad_rows)[static_cast<std::size_t>(k * nx_ + x)] += ps * pa * pse * dx;
                            if (grad_action)
                                (*grad_action)[static_cast<std::size_t>(a)] += ps * pse * rk * dx;
                        }
                    }
                }
            }
        }
        return info;
    }

    // P(X = x_sym) coefficients, as a function of rows (action fixed) or of
    // the action (rows fixed)
    std::vector<double> row_constraint_coef(std::span<const double> action, int x_sym) const {
        std::vector<double> coef(static_cast<std::size_t>(row_count() * nx_), 0.0);
        for (int a = 0; a < na_; ++a)
            for (int se = 0; se < nse_; ++se) {
                double r = 0.0;
                for (int s = 0; s < ns_; ++s)
                    r += m_->state.mass[static_cast<std::size_t>(s)] *
                         action[static_cast<std::size_t>(a)] * m_->encoder_probe_prob(s, a, 0, se);
                coef[static_cast<std::size_t>(row_of(se, a) * nx_ + x_sym)] = r;
            }
        return coef;
    }
    std::vector<double> action_constraint_coef(std::span<const double> rows, int x_sym) const {
        std::vector<double> coef(static_cast<std::size_t>(na_), 0.0);
        for (int a = 0; a < na_; ++a) {
            double q = 0.0;
            for (int s = 0; s < ns_; ++s)
                for (int se = 0; se < nse_; ++se)
                    q += m_->state.mass[static_cast<std::size_t>(s)] *
                         m_->encoder_probe_prob(s, a, 0, se) *
                         rows[static_cast<std::size_t>(row_of(se, a) * nx_ + x_sym)];
            coef[static_cast<std::size_t>(a)] = q;
        }
        return coef;
    }

private:
    const ProbingModel* m_;
    int ns_ = 0, nse_ = 0, na_ = 0, nx_ = 0, ny_ = 0;
};

inline SolveResult finish_thm1(const ProbingModel& m, const Thm1Workspace& ws,
                               const std::vector<double>& rows, double value,
                               std::vector<double> trace, SolveStatus status) {
    SolveResult r;
    r.value = value;
    r.status = status;
    r.trace = std::move(trace);
    r.action = ws.action();
    double cost = 0.0;
    for (int a = 0; a < m.Ae.size(); ++a)
        cost += r.action[static_cast<std::size_t>(a)] * m.cost.at(a, 0);
    r.achieved_cost = cost;
    r.row_keys = ws.keys();
    for (int k = 0; k < ws.row_count(); ++k)
        r.rows.emplace_back(rows.begin() + k * ws.nx(), rows.begin() + (k + 1) * ws.nx());
    return r;
}

} // namespace detail

// Maximizes I(X;Y|S) over the action distribution and the rows P(X|Se,A)
// under E[L(A)] <= gamma (plus the model's optional input constraint).
// Encoder-only models with full decoder state knowledge.
inline SolveResult solve_thm1(const ProbingModel& m, double gamma, const SolveOptions& opts = {}) {
    if (!m.encoder_only()) throw std::invalid_argument("solve_thm1: model has decoder actions");
    if (!m.decoder_has_full_csi())
        throw std::invalid_argument("solve_thm1: decoder does not observe the full state");
    detail::check_feasible_budget(m, gamma, "solve_thm1");

    AscentOptions aopts;
    aopts.max_iters = opts.max_iters;
    aopts.tol = opts.tol;

    auto run_rows = [&](const std::vector<double>& action, std::vector<double>* rows_init)
        -> std::pair<AscentResult, std::vector<double>> {
        detail::Thm1Workspace ws(m, action);
        std::vector<double> rows;
        if (rows_init && rows_init->size() == static_cast<std::size_t>(ws.row_count() * ws.nx()))
            rows = *rows_init;
        else
            rows.assign(static_cast<std::size_t>(ws.row_count() * ws.nx()), 1.0 / ws.nx());
        SimplexBlocks blocks = SimplexBlocks::from_sizes(
            std::vector<std::size_t>(static_cast<std::size_t>(ws.row_count()),
                                     static_cast<std::size_t>(ws.nx())));
        auto hs = detail::thm1_halfspaces(m, ws);
        auto eval = [&ws](std::span<const double> v, std::vector<double>* g) {
            return ws.eval(v, g);
        };
        AscentResult ar = projected_gradient_ascent(rows, blocks, hs, eval, aopts);
        return {std::move(ar), std::move(rows)};
    };

    if (auto pin = detail::pinned_action(m, gamma)) {
        detail::Thm1Workspace ws(m, *pin);
        auto [ar, rows] = run_rows(*pin, nullptr);
        return detail::finish_thm1(m, ws, rows, ar.value, std::move(ar.trace),
                                   ar.converged ? SolveStatus::converged
                                                : SolveStatus::multistart_best);
    }

    // general fallback: multistart alternating ascent over (P_A, rows)
    const int na = m.Ae.size();
    std::vector<double> cost_coef(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) cost_coef[static_cast<std::size_t>(a)] = m.cost.at(a, 0);

    std::mt19937_64 rng(opts.seed);
    std::vector<std::vector<double>> action_starts;
    action_starts.push_back(std::vector<double>(static_cast<std::size_t>(na), 1.0 / na));
    for (int a = 0; a < na; ++a)
        if (cost_coef[static_cast<std::size_t>(a)] <= gamma + 1e-12) {
            std::vector<double> v(static_cast<std::size_t>(na), 0.0);
            v[static_cast<std::size_t>(a)] = 1.0;
            action_starts.push_back(std::move(v));
        }
    while (static_cast<int>(action_starts.size()) < std::max(4, opts.multistarts / 4)) {
        std::vector<double> v(static_cast<std::size_t>(na));
        for (auto& e : v) e = -std::log(std::max(u01(rng), 1e-12));
        double sum = std::accumulate(v.begin(), v.end(), 0.0);
        for (auto& e : v) e /= sum;
        action_starts.push_back(std::move(v));
    }

    detail::Thm1FullEval fe(m);
    const int nrows = fe.row_count(), nx = m.X.size();
    SimplexBlocks ablock = SimplexBlocks::from_sizes({static_cast<std::size_t>(na)});
    SimplexBlocks rblocks = SimplexBlocks::from_sizes(std::vector<std::size_t>(
        static_cast<std::size_t>(nrows), static_cast<std::size_t>(nx)));
    std::vector<Halfspace> action_cost_hs{Halfspace{cost_coef, gamma}};

    std::optional<SolveResult> best;
    std::optional<std::vector<double>> best_rows;
    for (auto action : action_starts) {
        {
            auto hs = action_cost_hs;
            project_feasible(action, ablock, hs);
        }
        std::vector<double> rows(static_cast<std::size_t>(nrows * nx), 1.0 / nx);
        double value = 0.0;
        for (int round = 0; round < 8; ++round) {
            // rows step (concave for fixed action)
            std::vector<Halfspace> rhs;
            if (m.input_constraint)
                rhs.push_back(Halfspace{fe.row_constraint_coef(action, m.input_constraint->x_symbol),
                                        m.input_constraint->bound});
            auto eval_rows = [&](std::span<const double> v, std::vector<double>* g) {
                if (g) return fe.eval(action, v, g, nullptr);
                return fe.eval(action, v, nullptr, nullptr);
            };
            AscentResult ar = projected_gradient_ascent(rows, rblocks, rhs, eval_rows, aopts);
            value = ar.value;
            // action step (also concave for fixed rows)
            std::vector<Halfspace> ahs = action_cost_hs;
            if (m.input_constraint)
                ahs.push_back(Halfspace{fe.action_constraint_coef(rows, m.input_constraint->x_symbol),
                                        m.input_constraint->bound});
            auto eval_action = [&](std::span<const double> v, std::vector<double>* g) {
                if (g) return fe.eval(v, rows, nullptr, g);
                return fe.eval(v, rows, nullptr, nullptr);
            };
            AscentOptions aa = aopts;
            aa.max_iters = 400;
            AscentResult aa_res = projected_gradient_ascent(action, ablock, ahs, eval_action, aa);
            if (aa_res.value <= value + opts.tol && round >= 2) break;
            value = aa_res.value;
        }
        if (!best || value > best->value) {
            SolveResult cand;
            cand.value = value;
            cand.status = SolveStatus::multistart_best;
            cand.action = action;
            double cost = 0.0;
            for (int a = 0; a < na; ++a)
                cost += action[static_cast<std::size_t>(a)] * m.cost.at(a, 0);
            cand.achieved_cost = cost;
            for (int se = 0; se < m.Se.size(); ++se)
                for (int a = 0; a < na; ++a) {
                    cand.row_keys.emplace_back(se, a);
                    const int k = fe.row_of(se, a);
                    cand.rows.emplace_back(rows.begin() + k * nx, rows.begin() + (k + 1) * nx);
                }
            best = std::move(cand);
            best_rows = rows;
        }
    }
    return *best;
}

// Exhaustive grid over every free conditional-probability parameter (the
// action pinned the same way the solver pins it, or gridded when it cannot
// be). Ground truth for solver tests; refuses beyond the parameter cap.
inline SolveResult grid_oracle_thm1(const ProbingModel& m, double gamma, double resolution,
                                    const SolveOptions& opts = {}) {
    if (!m.encoder_only()) throw std::invalid_argument("grid_oracle_thm1: model has decoder actions");
    detail::check_feasible_budget(m, gamma, "grid_oracle_thm1");
    if (resolution <= 0.0 || resolution > 0.5)
        throw std::invalid_argument("grid_oracle_thm1: bad resolution");

    std::vector<std::vector<double>> action_candidates;
    bool pinned = false;
    if (auto pin = detail::pinned_action(m, gamma)) {
        action_candidates.push_back(*pin);
        pinned = true;
    }

    const int na = m.Ae.size();
    int steps = static_cast<int>(std::lround(1.0 / resolution));
    if (!pinned) {
        // grid the action simplex as extra parameters
        std::vector<double> probe(static_cast<std::size_t>(na), 0.0);
        std::function<void(int, double)> rec = [&](int a, double left) {
            if (a == na - 1) {
                probe[static_cast<std::size_t>(a)] = left;
                double c = 0.0;
                for (int i = 0; i < na; ++i)
                    c += probe[static_cast<std::size_t>(i)] * m.cost.at(i, 0);
                if (c <= gamma + 1e-12) action_candidates.push_back(probe);
                return;
            }
            for (int i = 0; i <= steps; ++i) {
                double v = static_cast<double>(i) / steps;
                if (v > left + 1e-12) break;
                probe[static_cast<std::size_t>(a)] = v;
                rec(a + 1, left - v);
            }
        };
        rec(0, 1.0);
    }

    // parameter-count guard against the most expensive action candidate
    int max_rows = 0;
    for (const auto& act : action_candidates) {
        detail::Thm1Workspace ws(m, act);
        max_rows = std::max(max_rows, ws.row_count());
    }
    int params = max_rows * (m.X.size() - 1) + (pinned ? 0 : na - 1);
    if (params > opts.oracle_param_cap)
        throw std::invalid_argument("grid_oracle_thm1: " + std::to_string(params) +
                                    " free parameters exceed cap " +
                                    std::to_string(opts.oracle_param_cap));

    SolveResult best;
    best.value = -1.0;
    const int nx = m.X.size();
    for (const auto& act : action_candidates) {
        detail::Thm1Workspace ws(m, act);
        const int nk = ws.row_count();
        std::vector<double> rows(static_cast<std::size_t>(nk * nx), 0.0);
        std::vector<double> icoef;
        double ibound = 0.0;
        if (m.input_constraint) {
            icoef = ws.input_marginal_coef(m.input_constraint->x_symbol);
            ibound = m.input_constraint->bound;
        }
        std::function<void(int)> rec_row = [&](int k) {
            if (k == nk) {
                if (!icoef.empty()) {
                    double dot = 0.0;
                    for (std::size_t i = 0; i < icoef.size(); ++i) dot += icoef[i] * rows[i];
                    if (dot > ibound + 1e-12) return;
                }
                double v = ws.eval(rows, nullptr);
                if (v > best.value) {
                    best = detail::finish_thm1(m, ws, rows, v, {}, SolveStatus::oracle);
                }
                return;
            }
            // enumerate the simplex grid for row k
            std::function<void(int, double)> rec_coord = [&](int x, double left) {
                if (x == nx - 1) {
                    rows[static_cast<std::size_t>(k * nx + x)] = left;
                    rec_row(k + 1);
                    return;
                }
                for (int i = 0; i <= steps; ++i) {
                    double val = static_cast<double>(i) / steps;
                    if (val > left + 1e-12) break;
                    rows[static_cast<std::size_t>(k * nx + x)] = val;
                    rec_coord(x + 1, left - val);
                }
            };
            rec_coord(0, 1.0);
        };
        rec_row(0);
    }
    if (best.value < 0.0) throw std::runtime_error("grid_oracle_thm1: no feasible grid point");
    best.status = SolveStatus::oracle;
    return best;
}

// expected input marginals P(x|s) implied by a thm1-style result
inline std::vector<std::vector<double>> thm1_state_input_marginals(const ProbingModel& m,
                                                                   const SolveResult& r) {
    detail::Thm1Workspace ws(m, r.action);
    std::vector<double> rows(static_cast<std::size_t>(ws.row_count() * ws.nx()), 1.0 / ws.nx());
    for (int k = 0; k < ws.row_count(); ++k) {
        for (std::size_t j = 0; j < r.row_keys.size(); ++j)
            if (r.row_keys[j] == ws.keys()[static_cast<std::size_t>(k)])
                for (int x = 0; x < ws.nx(); ++x)
                    rows[static_cast<std::size_t>(k * ws.nx() + x)] = r.rows[j][static_cast<std::size_t>(x)];
    }
    return ws.state_marginals(rows);
}

// ---- constrained Blahut-Arimoto -------------------------------------------------

struct BaChannel {
    int nu = 0, nv = 0;
    std::vector<double> w; // w[u*nv + v], rows stochastic
};

namespace detail {

struct BaState {
    std::vector<double> p;
    double info_bits = 0.0;
    double cost = 0.0;
    std::vector<double> trace; // Lagrangian per sweep, bits
};

// Alternating-maximization sweep at a fixed multiplier (nats internally).
// Stops on a small duality gap or when the Lagrangian stalls. An optional
// warm start is floored away from zero so no input stays frozen out.
inline BaState ba_fixed_multiplier(const BaChannel& ch, const std::vector<double>& cost,
                                   double mu, double gamma, double tol, int max_iters,
                                   const std::vector<double>* p_init = nullptr) {
    const int nu = ch.nu, nv = ch.nv;
    BaState st;
    if (p_init && p_init->size() == static_cast<std::size_t>(nu)) {
        st.p = *p_init;
        double z = 0.0;
        for (auto& p : st.p) {
            p = std::max(p, 1e-12);
            z += p;
        }
        for (auto& p : st.p) p /= z;
    } else {
        st.p.assign(static_cast<std::size_t>(nu), 1.0 / nu);
    }
    std::vector<double> v(static_cast<std::size_t>(nv));
    std::vector<double> d(static_cast<std::size_t>(nu));
    double prev_lagr = -std::numeric_limits<double>::infinity();
    for (int it = 0; it < max_iters; ++it) {
        std::fill(v.begin(), v.end(), 0.0);
        for (int u = 0; u < nu; ++u) {
            double pu = st.p[static_cast<std::size_t>(u)];
            if (pu <= 0.0) continue;
            for (int y = 0; y < nv; ++y)
                v[static_cast<std::size_t>(y)] += pu * ch.w[static_cast<std::size_t>(u * nv + y)];
        }
        double lagr = 0.0, ub = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < nu; ++u) {
            double du = 0.0;
            for (int y = 0; y < nv; ++y) {
                double wuy = ch.w[static_cast<std::size_t>(u * nv + y)];
                if (wuy <= 0.0) continue;
                du += wuy * std::log(wuy / std::max(v[static_cast<std::size_t>(y)], 1e-300));
            }
            d[static_cast<std::size_t>(u)] = du - mu * cost[static_cast<std::size_t>(u)];
            ub = std::max(ub, d[static_cast<std::size_t>(u)]);
            lagr += st.p[static_cast<std::size_t>(u)] * d[static_cast<std::size_t>(u)];
        }
        st.trace.push_back((lagr + mu * gamma) / std::numbers::ln2_v<double>);
        if (ub - lagr < tol) break;
        if (it > 64 && lagr - prev_lagr < tol * 1e-3) break; // stalled on an optimal face
        prev_lagr = lagr;
        double mx = -std::numeric_limits<double>::infinity();
        for (int u = 0; u < nu; ++u)
            if (st.p[static_cast<std::size_t>(u)] > 0.0)
                mx = std::max(mx, d[static_cast<std::size_t>(u)]);
        double z = 0.0;
        for (int u = 0; u < nu; ++u) {
            double pu = st.p[static_cast<std::size_t>(u)];
            st.p[static_cast<std::size_t>(u)] = pu > 0.0 ? pu * std::exp(d[static_cast<std::size_t>(u)] - mx) : 0.0;
            z += st.p[static_cast<std::size_t>(u)];
        }
        for (auto& pu : st.p) pu /= z;
    }
    // final statistics
    std::fill(v.begin(), v.end(), 0.0);
    for (int u = 0; u < nu; ++u)
        for (int y = 0; y < nv; ++y)
            v[static_cast<std::size_t>(y)] +=
                st.p[static_cast<std::size_t>(u)] * ch.w[static_cast<std::size_t>(u * nv + y)];
    st.info_bits = 0.0;
    st.cost = 0.0;
    for (int u = 0; u < nu; ++u) {
        double pu = st.p[static_cast<std::size_t>(u)];
        if (pu <= 0.0) continue;
        st.cost += pu * cost[static_cast<std::size_t>(u)];
        for (int y = 0; y < nv; ++y) {
            double wuy = ch.w[static_cast<std::size_t>(u * nv + y)];
            if (wuy <= 0.0) continue;
            st.info_bits += pu * wuy * std::log2(wuy / std::max(v[static_cast<std::size_t>(y)], 1e-300));
        }
    }
    return st;
}

inline double info_bits_of(const BaChannel& ch, const std::vector<double>& p) {
    std::vector<double> v(static_cast<std::size_t>(ch.nv), 0.0);
    for (int u = 0; u < ch.nu; ++u)
        for (int y = 0; y < ch.nv; ++y)
            v[static_cast<std::size_t>(y)] += p[static_cast<std::size_t>(u)] *
                                              ch.w[static_cast<std::size_t>(u * ch.nv + y)];
    double info = 0.0;
    for (int u = 0; u < ch.nu; ++u) {
        double pu = p[static_cast<std::size_t>(u)];
        if (pu <= 0.0) continue;
        for (int y = 0; y < ch.nv; ++y) {
            double wuy = ch.w[static_cast<std::size_t>(u * ch.nv + y)];
            if (wuy <= 0.0) continue;
            info += pu * wuy * std::log2(wuy / std::max(v[static_cast<std::size_t>(y)], 1e-300));
        }
    }
    return info;
}

} // namespace detail

// Capacity-cost value of a single-letter channel by alternating updates with
// multiplier bisection on the cost constraint.
inline SolveResult blahut_arimoto_constrained(const BaChannel& ch, const std::vector<double>& cost,
                                              double gamma, double tol = 1e-11,
                                              int max_iters = 20000) {
    if (ch.nu < 1 || ch.nv < 1 || ch.w.size() != static_cast<std::size_t>(ch.nu) * ch.nv)
        throw std::invalid_argument("blahut_arimoto_constrained: bad channel shape");
    if (cost.size() != static_cast<std::size_t>(ch.nu))
        throw std::invalid_argument("blahut_arimoto_constrained: cost size mismatch");
    double cmin = *std::min_element(cost.begin(), cost.end());
    if (gamma < cmin - 1e-12)
        throw std::invalid_argument("blahut_arimoto_constrained: infeasible budget");

    const double feas_eps = 1e-9;
    std::vector<double> warm;
    auto run = [&](double mu) {
        detail::BaState st = detail::ba_fixed_multiplier(ch, cost, mu, gamma, tol, max_iters,
                                                         warm.empty() ? nullptr : &warm);
        warm = st.p;
        return st;
    };

    detail::BaState unconstrained = run(0.0);
    detail::BaState final_state = unconstrained;
    if (unconstrained.cost > gamma + feas_eps) {
        double lo = 0.0, hi = 1.0;
        detail::BaState hi_state = run(hi);
        int guard = 0;
        while (hi_state.cost > gamma + feas_eps && guard++ < 80) {
            lo = hi;
            hi *= 2.0;
            hi_state = run(hi);
        }
        detail::BaState lo_state = unconstrained;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            detail::BaState mid_state = run(mid);
            if (mid_state.cost > gamma + feas_eps) {
                lo = mid;
                lo_state = std::move(mid_state);
            } else {
                hi = mid;
                hi_state = std::move(mid_state);
            }
        }
        final_state = hi_state;
        // close a possible kink gap by mixing toward the exact budget
        if (lo_state.cost > hi_state.cost + 1e-15) {
            double lam = (gamma - hi_state.cost) / (lo_state.cost - hi_state.cost);
            lam = std::clamp(lam, 0.0, 1.0);
            std::vector<double> mix(static_cast<std::size_t>(ch.nu));
            for (int u = 0; u < ch.nu; ++u)
                mix[static_cast<std::size_t>(u)] =
                    lam * lo_state.p[static_cast<std::size_t>(u)] +
                    (1.0 - lam) * hi_state.p[static_cast<std::size_t>(u)];
            double mix_cost = 0.0;
            for (int u = 0; u < ch.nu; ++u)
                mix_cost += mix[static_cast<std::size_t>(u)] * cost[static_cast<std::size_t>(u)];
            if (mix_cost <= gamma + feas_eps) {
                double mix_info = detail::info_bits_of(ch, mix);
                if (mix_info > final_state.info_bits) {
                    final_state.p = std::move(mix);
                    final_state.info_bits = mix_info;
                    final_state.cost = mix_cost;
                }
            }
        }
    }

    SolveResult r;
    r.value = final_state.info_bits;
    r.achieved_cost = final_state.cost;
    r.status = SolveStatus::converged;
    r.trace = std::move(final_state.trace);
    r.action = std::move(final_state.p); // input distribution of the reduced channel
    return r;
}

// ---- Shannon-strategy reductions ------------------------------------------------

namespace detail {

inline std::int64_t strategy_count(const ProbingModel& m) {
    std::int64_t n = m.Ae.size();
    for (int i = 0; i < m.Se.size(); ++i) {
        n *= m.X.size();
        if (n > (std::int64_t(1) << 40)) return n;
    }
    return n;
}

inline StrategyAtom strategy_atom(const ProbingModel& m, std::int64_t index) {
    StrategyAtom t;
    t.ae = static_cast<int>(index % m.Ae.size());
    index /= m.Ae.size();
    t.x_of_se.resize(static_cast<std::size_t>(m.Se.size()));
    for (int se = 0; se < m.Se.size(); ++se) {
        t.x_of_se[static_cast<std::size_t>(se)] = static_cast<int>(index % m.X.size());
        index /= m.X.size();
    }
    return t;
}

// channel P(Y,Sd | strategy) at a fixed decoder action
inline BaChannel strategy_channel(const ProbingModel& m, int ad,
                                  const std::vector<StrategyAtom>& atoms) {
    BaChannel ch;
    ch.nu = static_cast<int>(atoms.size());
    ch.nv = m.Y.size() * m.Sd.size();
    ch.w.assign(static_cast<std::size_t>(ch.nu) * ch.nv, 0.0);
    for (int t = 0; t < ch.nu; ++t) {
        const StrategyAtom& atom = atoms[static_cast<std::size_t>(t)];
        for (int s = 0; s < m.S.size(); ++s) {
            double ps = m.state.mass[static_cast<std::size_t>(s)];
            if (ps <= 0.0) continue;
            for (int se = 0; se < m.Se.size(); ++se)
                for (int sd = 0; sd < m.Sd.size(); ++sd) {
                    double pr = m.probe_prob(s, atom.ae, ad, se, sd);
                    if (pr <= 0.0) continue;
                    int x = atom.x_of_se[static_cast<std::size_t>(se)];
                    for (int y = 0; y < m.Y.size(); ++y) {
                        double wy = m.channel_prob(x, s, y);
                        if (wy <= 0.0) continue;
                        ch.w[static_cast<std::size_t>(t) * ch.nv + y * m.Sd.size() + sd] +=
                            ps * pr * wy;
                    }
                }
        }
    }
    return ch;
}

inline SolveResult pack_strategy_result(const ProbingModel& m, const std::vector<StrategyAtom>& atoms,
                                        const SolveResult& ba, int ad) {
    SolveResult r;
    r.value = ba.value;
    r.achieved_cost = ba.achieved_cost;
    r.status = SolveStatus::converged;
    r.trace = ba.trace;
    r.action.assign(static_cast<std::size_t>(m.Ae.size()), 0.0);
    for (std::size_t t = 0; t < atoms.size(); ++t) {
        double p = ba.action[t];
        r.action[static_cast<std::size_t>(atoms[t].ae)] += p;
        if (p > 1e-12) {
            r.strategies.push_back(atoms[t]);
            r.strategy_probs.push_back(p);
            r.strategy_ad.push_back(ad);
        }
    }
    r.u_size = static_cast<int>(r.strategies.size());
    return r;
}

} // namespace detail

// Causal probing value via the strategy-channel reduction: every auxiliary
// letter is an (action, input-plan) pair, so the maximization is exactly the
// capacity-cost of the induced single-letter channel. With opts.u_cap set,
// restricts to supports of that size by subset enumeration.
inline SolveResult solve_thm3(const ProbingModel& m, double gamma, const SolveOptions& opts = {}) {
    if (!m.encoder_only()) throw std::invalid_argument("solve_thm3: model has decoder actions");
    detail::check_feasible_budget(m, gamma, "solve_thm3");

    std::int64_t count = detail::strategy_count(m);
    if (count > opts.strategy_cap)
        throw std::invalid_argument("solve_thm3: strategy space size " + std::to_string(count) +
                                    " exceeds cap " + std::to_string(opts.strategy_cap));
    std::vector<StrategyAtom> atoms;
    atoms.reserve(static_cast<std::size_t>(count));
    for (std::int64_t i = 0; i < count; ++i) atoms.push_back(detail::strategy_atom(m, i));
    std::vector<double> cost(atoms.size());
    for (std::size_t t = 0; t < atoms.size(); ++t)
        cost[t] = m.cost.at(atoms[t].ae, 0);

    if (opts.u_cap > 0 && opts.u_cap < static_cast<int>(atoms.size())) {
        // enumerate supports of the requested size
        const int n = static_cast<int>(atoms.size()), k = opts.u_cap;
        std::vector<int> pick(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) pick[static_cast<std::size_t>(i)] = i;
        std::optional<SolveResult> best;
        std::int64_t combos = 1;
        for (int i = 0; i < k; ++i) combos = combos * (n - i) / (i + 1);
        if (combos > opts.strategy_cap)
            throw std::invalid_argument("solve_thm3: " + std::to_string(combos) +
                                        " support subsets exceed cap");
        while (true) {
            std::vector<StrategyAtom> sub;
            std::vector<double> sub_cost;
            for (int i : pick) {
                sub.push_back(atoms[static_cast<std::size_t>(i)]);
                sub_cost.push_back(cost[static_cast<std::size_t>(i)]);
            }
            if (*std::min_element(sub_cost.begin(), sub_cost.end()) <= gamma + 1e-12) {
                BaChannel ch = detail::strategy_channel(m, 0, sub);
                SolveResult ba = blahut_arimoto_constrained(ch, sub_cost, gamma, opts.tol);
                SolveResult cand = detail::pack_strategy_result(m, sub, ba, 0);
                if (!best || cand.value > best->value) best = std::move(cand);
            }
            int i = k - 1;
            while (i >= 0 && pick[static_cast<std::size_t>(i)] == n - k + i) --i;
            if (i < 0) break;
            ++pick[static_cast<std::size_t>(i)];
            for (int j = i + 1; j < k; ++j)
                pick[static_cast<std::size_t>(j)] = pick[static_cast<std::size_t>(j - 1)] + 1;
        }
        if (!best) throw std::runtime_error("solve_thm3: no feasible support");
        return *best;
    }

    BaChannel ch = detail::strategy_channel(m, 0, atoms);
    SolveResult ba = blahut_arimoto_constrained(ch, cost, gamma, opts.tol);
    return detail::pack_strategy_result(m, atoms, ba, 0);
}

// ---- auxiliary-variable lower bound (non-causal encoding) ------------------------

namespace detail {

// Direct evaluator for I(U;Y,Sd) - I(U;Se|A) under the factorization
// P_A P_S P(Se,Sd|S,A) P(U|Se,A) 1{X=f(U,Se)} P(Y|X,S).
class Thm2Eval {
public:
    Thm2Eval(const ProbingModel& m, int nu, std::vector<int> f) : m_(&m), nu_(nu), f_(std::move(f)) {
        ns_ = m.S.size();
        nse_ = m.Se.size();
        na_ = m.Ae.size();
        nsd_ = m.Sd.size();
        ny_ = m.Y.size();
        if (f_.size() != static_cast<std::size_t>(nu_) * nse_)
            throw std::invalid_argument("Thm2Eval: f table size mismatch");
        pse_a_.assign(static_cast<std::size_t>(na_ * nse_), 0.0);
        for (int a = 0; a < na_; ++a)
            for (int se = 0; se < nse_; ++se) {
                double v = 0.0;
                for (int s = 0; s < ns_; ++s)
                    v += m.state.mass[static_cast<std::size_t>(s)] * m.encoder_probe_prob(s, a, 0, se);
                pse_a_[static_cast<std::size_t>(a * nse_ + se)] = v;
            }
    }

    int dim() const { return na_ + nse_ * na_ * nu_; }
    int nu() const { return nu_; }
    int row_offset(int se, int a) const { return na_ + (se * na_ + a) * nu_; }
    int f_at(int u, int se) const { return f_[static_cast<std::size_t>(u) * nse_ + se]; }

    double value(std::span<const double> v) const { return eval_impl(v, nullptr); }

    double eval(std::span<const double> v, std::vector<double>* grad) const {
        if (!grad) return eval_impl(v, nullptr);
        double base = eval_impl(v, grad); // analytic part fills the row gradient
        // finite differences for the action block
        std::vector<double> pert(v.begin(), v.end());
        const double h = 3e-7;
        for (int a = 0; a < na_; ++a) {
            double keep = pert[static_cast<std::size_t>(a)];
            pert[static_cast<std::size_t>(a)] = keep + h;
            double up = eval_impl(pert, nullptr);
            pert[static_cast<std::size_t>(a)] = keep - h;
            double dn = eval_impl(pert, nullptr);
            pert[static_cast<std::size_t>(a)] = keep;
            (*grad)[static_cast<std::size_t>(a)] = (up - dn) / (2.0 * h);
        }
        return base;
    }

private:
    double eval_impl(std::span<const double> v, std::vector<double>* grad) const {
        const ProbingModel& m = *m_;
        auto& pu = scratch_pu_;
        auto& pu_a = scratch_pu_a_;
        auto& t = scratch_t_;
        pu.assign(static_cast<std::size_t>(nu_), 0.0);
        pu_a.assign(static_cast<std::size_t>(na_ * nu_), 0.0);
        t.assign(static_cast<std::size_t>(nu_ * ny_ * nsd_), 0.0);

        for (int a = 0; a < na_; ++a) {
            double alpha = std::max(v[static_cast<std::size_t>(a)], 0.0);
            for (int se = 0; se < nse_; ++se) {
                double pse = pse_a_[static_cast<std::size_t>(a * nse_ + se)];
                const int off = row_offset(se, a);
                for (int u = 0; u < nu_; ++u) {
                    double r = std::max(v[static_cast<std::size_t>(off + u)], 0.0);
                    if (r <= 0.0) continue;
                    pu_a[static_cast<std::size_t>(a * nu_ + u)] += pse * r;
                    pu[static_cast<std::size_t>(u)] += alpha * pse * r;
                    if (alpha <= 0.0) continue;
                    const int x = f_at(u, se);
                    for (int s = 0; s < ns_; ++s) {
                        double ps = m.state.mass[static_cast<std::size_t>(s)];
                        if (ps <= 0.0) continue;
                        for (int sd = 0; sd < nsd_; ++sd) {
                            double rho = m.probe_prob(s, a, 0, se, sd);
                            if (rho <= 0.0) continue;
                            for (int y = 0; y < ny_; ++y) {
                                double w = m.channel_prob(x, s, y);
                                if (w <= 0.0) continue;
                                t[(static_cast<std::size_t>(u) * ny_ + y) * nsd_ + sd] +=
                                    alpha * ps * rho * w * r;
                            }
                        }
                    }
                }
            }
        }

        auto& pysd = scratch_pysd_;
        pysd.assign(static_cast<std::size_t>(ny_ * nsd_), 0.0);
        for (int u = 0; u < nu_; ++u)
            for (int y = 0; y < ny_; ++y)
                for (int sd = 0; sd < nsd_; ++sd)
                    pysd[static_cast<std::size_t>(y * nsd_ + sd)] +=
                        t[(static_cast<std::size_t>(u) * ny_ + y) * nsd_ + sd];

        double hu = 0.0;
        for (double p : pu) hu -= plog2p(p);
        double hysd = 0.0;
        for (double p : pysd) hysd -= plog2p(p);
        double ht = 0.0;
        for (double p : t) ht -= plog2p(p);
        double hu_given_a = 0.0, hu_given_sea = 0.0;
        for (int a = 0; a < na_; ++a) {
            double alpha = std::max(v[static_cast<std::size_t>(a)], 0.0);
            if (alpha <= 0.0) continue;
            double ha = 0.0;
            for (int u = 0; u < nu_; ++u)
                ha -= plog2p(pu_a[static_cast<std::size_t>(a * nu_ + u)]);
            hu_given_a += alpha * ha;
            for (int se = 0; se < nse_; ++se) {
                double w = alpha * pse_a_[static_cast<std::size_t>(a * nse_ + se)];
                if (w <= 0.0) continue;
                const int off = row_offset(se, a);
                double hr = 0.0;
                for (int u = 0; u < nu_; ++u)
                    hr -= plog2p(std::max(v[static_cast<std::size_t>(off + u)], 0.0));
                hu_given_sea += w * hr;
            }
        }
        double g = (hu + hysd - ht) - (hu_given_a - hu_given_sea);

        if (grad) {
            std::fill(grad->begin(), grad->end(), 0.0);
            for (int a = 0; a < na_; ++a) {
                double alpha = std::max(v[static_cast<std::size_t>(a)], 0.0);
                for (int se = 0; se < nse_; ++se) {
                    double pse = pse_a_[static_cast<std::size_t>(a * nse_ + se)];
                    double w_sea = alpha * pse;
                    const int off = row_offset(se, a);
                    for (int u = 0; u < nu_; ++u) {
                        double gr = 0.0;
                        gr -= w_sea * safe_log2(pu[static_cast<std::size_t>(u)]);
                        gr += w_sea * safe_log2(pu_a[static_cast<std::size_t>(a * nu_ + u)]);
                        gr -= w_sea * safe_log2(std::max(v[static_cast<std::size_t>(off + u)], 0.0));
                        if (alpha > 0.0) {
                            const int x = f_at(u, se);
                            for (int s = 0; s < ns_; ++s) {
                                double ps = m.state.mass[static_cast<std::size_t>(s)];
                                if (ps <= 0.0) continue;
                                for (int sd = 0; sd < nsd_; ++sd) {
                                    double rho = m.probe_prob(s, a, 0, se, sd);
                                    if (rho <= 0.0) continue;
                                    for (int y = 0; y < ny_; ++y) {
                                        double w = m.channel_prob(x, s, y);
                                        if (w <= 0.0) continue;
                                        double kappa = alpha * ps * rho * w;
                                        gr -= kappa * safe_log2(pysd[static_cast<std::size_t>(y * nsd_ + sd)]);
                                        gr += kappa * safe_log2(
                                                          t[(static_cast<std::size_t>(u) * ny_ + y) * nsd_ + sd]);
                                    }
                                }
                            }
                        }
                        (*grad)[static_cast<std::size_t>(off + u)] = gr;
                    }
                }
            }
        }
        return g;
    }

    const ProbingModel* m_;
    int nu_;
    std::vector<int> f_;
    int ns_ = 0, nse_ = 0, na_ = 0, nsd_ = 0, ny_ = 0;
    std::vector<double> pse_a_;
    // per-instance scratch; instances are not shared across threads
    mutable std::vector<double> scratch_pu_, scratch_pu_a_, scratch_t_, scratch_pysd_;
};

// canonical representative of an f table under relabeling of U
inline bool f_is_canonical(const std::vector<int>& f, int nu, int nse) {
    std::vector<int> perm(static_cast<std::size_t>(nu));
    for (int i = 0; i < nu; ++i) perm[static_cast<std::size_t>(i)] = i;
    while (std::next_permutation(perm.begin(), perm.end())) {
        // compare f(perm(u), se) against f lexicographically
        for (int u = 0; u < nu; ++u) {
            bool decided = false;
            for (int se = 0; se < nse && !decided; ++se) {
                int a = f[static_cast<std::size_t>(perm[static_cast<std::size_t>(u)]) * nse + se];
                int b = f[static_cast<std::size_t>(u) * nse + se];
                if (a < b) return false; // a smaller relabeling exists
                if (a > b) decided = true;
            }
            if (decided) break;
        }
    }
    return true;
}

// Exact feasible point built from encoder-side optimal rows: U splits into
// one block per action, the block distribution realizes each row target by
// thresholding, and the penalty term vanishes because U is drawn
// independently of Se within each block.
struct Thm2WarmStart {
    std::vector<double> vars;
    std::vector<int> f;
    int nu = 0;
};

inline std::optional<Thm2WarmStart> thm2_warm_start(const ProbingModel& m, double gamma, int u_cap,
                                                    const SolveOptions& opts) {
    if (m.X.size() != 2 || !m.decoder_has_full_csi()) return std::nullopt;
    // deterministic encoder probe only
    for (int s = 0; s < m.S.size(); ++s)
        for (int a = 0; a < m.Ae.size(); ++a) {
            double mx = 0.0;
            for (int se = 0; se < m.Se.size(); ++se)
                mx = std::max(mx, m.encoder_probe_prob(s, a, 0, se));
            if (mx < 1.0 - 1e-12) return std::nullopt;
        }
    SolveResult base;
    try {
        base = solve_thm1(m, gamma, opts);
    } catch (const std::exception&) {
        return std::nullopt;
    }

    const int na = m.Ae.size(), nse = m.Se.size();
    struct Block {
        int a;
        std::vector<double> atom_mass;
        std::vector<std::vector<int>> f_rows; // per atom: x choice per se
    };
    std::vector<Block> blocks;
    for (int a = 0; a < na; ++a) {
        if (base.action[static_cast<std::size_t>(a)] <= 1e-12) continue;
        Block blk;
        blk.a = a;
        // reachable rows under this action and their P(X=0) targets
        std::vector<std::pair<int, double>> targets; // (se, q)
        for (std::size_t j = 0; j < base.row_keys.size(); ++j)
            if (base.row_keys[j].second == a) targets.emplace_back(base.row_keys[j].first, base.rows[j][0]);
        if (targets.empty()) continue;
        bool built = false;
        if (targets.size() == 2 &&
            std::abs(targets[0].second + targets[1].second - 1.0) < 1e-6) {
            // complementary pair: two atoms suffice
            double r = targets[0].second;
            blk.atom_mass = {r, 1.0 - r};
            blk.f_rows.assign(2, std::vector<int>(static_cast<std::size_t>(nse), 0));
            for (int atom = 0; atom < 2; ++atom)
                for (int se = 0; se < nse; ++se) {
                    int x;
                    if (se == targets[0].first)
                        x = (atom == 0) ? 0 : 1;
                    else if (se == targets[1].first)
                        x = (atom == 1) ? 0 : 1;
                    else
                        x = 0;
                    blk.f_rows[static_cast<std::size_t>(atom)][static_cast<std::size_t>(se)] = x;
                }
            built = true;
        }
        if (!built) {
            // threshold representation over the sorted distinct targets
            std::vector<double> cuts;
            for (auto& [se, q] : targets) cuts.push_back(q);
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end(),
                                   [](double a_, double b_) { return std::abs(a_ - b_) < 1e-9; }),
                       cuts.end());
            std::vector<double> bounds{0.0};
            for (double c : cuts)
                if (c > 1e-12 && c < 1.0 - 1e-12) bounds.push_back(c);
            bounds.push_back(1.0);
            for (std::size_t i = 0; i + 1 < bounds.size(); ++i)
                blk.atom_mass.push_back(bounds[i + 1] - bounds[i]);
            blk.f_rows.assign(blk.atom_mass.size(), std::vector<int>(static_cast<std::size_t>(nse), 0));
            for (std::size_t atom = 0; atom < blk.atom_mass.size(); ++atom)
                for (int se = 0; se < nse; ++se) {
                    double q = 1.0; // default: unreachable rows emit x=0
                    for (auto& [se2, q2] : targets)
                        if (se2 == se) q = q2;
                    // atom lies below the q threshold -> x = 0
                    double upper = bounds[atom + 1];
                    blk.f_rows[atom][static_cast<std::size_t>(se)] = (upper <= q + 1e-12) ? 0 : 1;
                }
        }
        blocks.push_back(std::move(blk));
    }
    int total = 0;
    for (const auto& b : blocks) total += static_cast<int>(b.atom_mass.size());
    if (total == 0 || total > u_cap) return std::nullopt;

    Thm2WarmStart ws;
    ws.nu = total;
    ws.f.assign(static_cast<std::size_t>(total) * nse, 0);
    Thm2Eval layout(m, total, ws.f); // only for offsets
    ws.vars.assign(static_cast<std::size_t>(layout.dim()), 0.0);
    for (int a = 0; a < na; ++a) ws.vars[static_cast<std::size_t>(a)] = base.action[static_cast<std::size_t>(a)];
    int u0 = 0;
    for (const auto& blk : blocks) {
        for (std::size_t atom = 0; atom < blk.atom_mass.size(); ++atom) {
            int u = u0 + static_cast<int>(atom);
            for (int se = 0; se < nse; ++se)
                ws.f[static_cast<std::size_t>(u) * nse + se] = blk.f_rows[atom][static_cast<std::size_t>(se)];
            // the block's atoms form P(U|se,a) for its own action, any se
            for (int se = 0; se < nse; ++se)
                ws.vars[static_cast<std::size_t>(layout.row_offset(se, blk.a) + u)] = blk.atom_mass[atom];
        }
        u0 += static_cast<int>(blk.atom_mass.size());
    }
    // rows for actions without a block (or zero-probability actions): uniform
    for (int a = 0; a < na; ++a) {
        bool owned = false;
        for (const auto& blk : blocks)
            if (blk.a == a) owned = true;
        if (owned) continue;
        for (int se = 0; se < nse; ++se)
            for (int u = 0; u < total; ++u)
                ws.vars[static_cast<std::size_t>(layout.row_offset(se, a) + u)] = 1.0 / total;
    }
    return ws;
}

} // namespace detail

// Objective value of the non-causal auxiliary factorization at a given
// (P_A, P(U|Se,A), f) point. Exposed for tests and feasible-point checks.
inline double thm2_objective(const ProbingModel& m, const std::vector<double>& action,
                             const std::vector<std::vector<double>>& rows_u,
                             const std::vector<int>& f_u_se) {
    if (rows_u.empty()) throw std::invalid_argument("thm2_objective: no rows");
    const int nu = static_cast<int>(rows_u[0].size());
    detail::Thm2Eval ev(m, nu, f_u_se);
    std::vector<double> v(static_cast<std::size_t>(ev.dim()), 0.0);
    for (int a = 0; a < m.Ae.size(); ++a) v[static_cast<std::size_t>(a)] = action[static_cast<std::size_t>(a)];
    if (rows_u.size() != static_cast<std::size_t>(m.Se.size()) * m.Ae.size())
        throw std::invalid_argument("thm2_objective: rows must cover every (se,a) pair");
    for (int se = 0; se < m.Se.size(); ++se)
        for (int a = 0; a < m.Ae.size(); ++a) {
            const auto& r = rows_u[static_cast<std::size_t>(se * m.Ae.size() + a)];
            if (static_cast<int>(r.size()) != nu)
                throw std::invalid_argument("thm2_objective: ragged rows");
            for (int u = 0; u < nu; ++u)
                v[static_cast<std::size_t>(ev.row_offset(se, a) + u)] = r[static_cast<std::size_t>(u)];
        }
    return ev.value(v);
}

// Lower bound on the non-causal probing value: multistart projected ascent
// over (P_A, P(U|Se,A)) with the input map enumerated over deterministic
// tables. The objective is not concave, so the result is reported as a
// multistart best and labelled a lower bound.
inline SolveResult solve_thm2_lower(const ProbingModel& m, double gamma,
                                    const SolveOptions& opts = {}) {
    if (!m.encoder_only()) throw std::invalid_argument("solve_thm2_lower: model has decoder actions");
    detail::check_feasible_budget(m, gamma, "solve_thm2_lower");

    const int bound = detail::thm2_u_bound(m);
    const int nu = opts.u_cap > 0 ? std::min(opts.u_cap, bound) : std::min(4, bound);
    const int nse = m.Se.size(), na = m.Ae.size(), nx = m.X.size();

    double f_count_d = std::pow(static_cast<double>(nx), static_cast<double>(nu) * nse);
    if (f_count_d > static_cast<double>(opts.strategy_cap))
        throw std::invalid_argument("solve_thm2_lower: " + std::to_string(f_count_d) +
                                    " input maps exceed cap " + std::to_string(opts.strategy_cap));
    const std::int64_t f_count = static_cast<std::int64_t>(f_count_d);

    std::vector<std::vector<int>> f_classes;
    for (std::int64_t code = 0; code < f_count; ++code) {
        std::vector<int> f(static_cast<std::size_t>(nu) * nse);
        std::int64_t c = code;
        for (std::size_t i = 0; i < f.size(); ++i) {
            f[i] = static_cast<int>(c % nx);
            c /= nx;
        }
        if (detail::f_is_canonical(f, nu, nse)) f_classes.push_back(std::move(f));
    }

    std::vector<double> cost_coef(static_cast<std::size_t>(na));
    for (int a = 0; a < na; ++a) cost_coef[static_cast<std::size_t>(a)] = m.cost.at(a, 0);
    auto pinned = detail::pinned_action(m, gamma);

    struct Candidate {
        double value = -std::numeric_limits<double>::infinity();
        std::vector<double> vars;
        std::vector<int> f_own;
    };

    auto make_start = [&](const detail::Thm2Eval& ev, std::uint64_t key, int si) {
        std::mt19937_64 rng(mix_seed(opts.seed, key));
        std::vector<double> start(static_cast<std::size_t>(ev.dim()));
        if (pinned)
            for (int a = 0; a < na; ++a)
                start[static_cast<std::size_t>(a)] = (*pinned)[static_cast<std::size_t>(a)];
        else
            for (int a = 0; a < na; ++a) start[static_cast<std::size_t>(a)] = 1.0 / na;
        for (int r = 0; r < nse * na; ++r) {
            const std::size_t off = static_cast<std::size_t>(na + r * nu);
            if (si == 0) {
                for (int u = 0; u < nu; ++u) start[off + static_cast<std::size_t>(u)] = 1.0 / nu;
            } else if (si % 2 == 1) {
                // vertex-biased draw
                int peak = static_cast<int>(rng() % static_cast<std::uint64_t>(nu));
                double rest = 0.1 / std::max(1, nu - 1);
                for (int u = 0; u < nu; ++u)
                    start[off + static_cast<std::size_t>(u)] = (u == peak) ? 0.9 : rest;
            } else {
                double sum = 0.0;
                for (int u = 0; u < nu; ++u) {
                    double e = -std::log(std::max(u01(rng), 1e-12));
                    start[off + static_cast<std::size_t>(u)] = e;
                    sum += e;
                }
                for (int u = 0; u < nu; ++u) start[off + static_cast<std::size_t>(u)] /= sum;
            }
        }
        if (!pinned && si > 0) {
            double sum = 0.0;
            for (int a = 0; a < na; ++a) {
                double e = -std::log(std::max(u01(rng), 1e-12));
                start[static_cast<std::size_t>(a)] = e;
                sum += e;
            }
            for (int a = 0; a < na; ++a) start[static_cast<std::size_t>(a)] /= sum;
        }
        return start;
    };

    auto ascend = [&](const std::vector<int>& f, std::vector<double> start,
                      const AscentOptions& aopts) -> Candidate {
        detail::Thm2Eval ev(m, nu, f);
        std::vector<std::size_t> sizes{static_cast<std::size_t>(na)};
        for (int i = 0; i < nse * na; ++i) sizes.push_back(static_cast<std::size_t>(nu));
        SimplexBlocks blocks = SimplexBlocks::from_sizes(sizes);
        std::vector<double> ccoef(static_cast<std::size_t>(ev.dim()), 0.0);
        for (int a = 0; a < na; ++a) ccoef[static_cast<std::size_t>(a)] = cost_coef[static_cast<std::size_t>(a)];
        std::vector<Halfspace> hs{Halfspace{ccoef, gamma}};
        auto eval = [&ev](std::span<const double> v, std::vector<double>* g) {
            return ev.eval(v, g);
        };
        AscentResult ar = projected_gradient_ascent(start, blocks, hs, eval, aopts);
        Candidate c;
        c.value = ar.value;
        c.vars = std::move(start);
        c.f_own = f;
        return c;
    };

    // screen every map class cheaply, then spend the multistart budget on the
    // promising ones
    AscentOptions screen_opts;
    screen_opts.max_iters = 80;
    screen_opts.tol = 1e-8;
    AscentOptions polish_opts;
    polish_opts.max_iters = std::min(opts.max_iters, 800);
    polish_opts.tol = std::max(opts.tol, 1e-12);

    std::vector<Candidate> screened(f_classes.size());
    parallel_for(f_classes.size(), [&](std::size_t ci) {
        const auto& f = f_classes[ci];
        detail::Thm2Eval ev(m, nu, f);
        Candidate best;
        for (int si = 0; si < 2; ++si) {
            Candidate c = ascend(f, make_start(ev, ci * 1000003ull + static_cast<std::uint64_t>(si), si),
                                 screen_opts);
            if (c.value > best.value) best = std::move(c);
        }
        screened[ci] = std::move(best);
    });

    std::vector<std::size_t> order(f_classes.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        if (screened[a].value != screened[b].value) return screened[a].value > screened[b].value;
        return a < b;
    });
    const std::size_t polish_count =
        std::min(order.size(), std::max<std::size_t>(8, order.size() / 16));

    std::vector<Candidate> polished(polish_count);
    parallel_for(polish_count, [&](std::size_t oi) {
        const std::size_t ci = order[oi];
        const auto& f = f_classes[ci];
        detail::Thm2Eval ev(m, nu, f);
        Candidate best = ascend(f, screened[ci].vars, polish_opts);
        for (int si = 1; si < std::max(1, opts.multistarts); ++si) {
            Candidate c = ascend(
                f, make_start(ev, 0xF00Dull + ci * 1000003ull + static_cast<std::uint64_t>(si), si),
                polish_opts);
            if (c.value > best.value) best = std::move(c);
        }
        polished[oi] = std::move(best);
    });

    Candidate best;
    for (auto& c : polished)
        if (c.value > best.value) best = std::move(c);

    // exact warm start when the model admits one
    if (auto ws = detail::thm2_warm_start(m, gamma, nu, opts)) {
        std::vector<int> padded = ws->f;
        int total_nu = ws->nu;
        if (total_nu < nu) {
            // pad to the working cardinality with unused letters
            padded.resize(static_cast<std::size_t>(nu) * nse, 0);
            detail::Thm2Eval lay_small(m, total_nu, ws->f), lay_big(m, nu, padded);
            std::vector<double> vars(static_cast<std::size_t>(lay_big.dim()), 0.0);
            for (int a = 0; a < na; ++a) vars[static_cast<std::size_t>(a)] = ws->vars[static_cast<std::size_t>(a)];
            for (int se = 0; se < nse; ++se)
                for (int a = 0; a < na; ++a)
                    for (int u = 0; u < total_nu; ++u)
                        vars[static_cast<std::size_t>(lay_big.row_offset(se, a) + u)] =
                            ws->vars[static_cast<std::size_t>(lay_small.row_offset(se, a) + u)];
            ws->vars = std::move(vars);
            ws->f = padded;
            ws->nu = nu;
        }
        Candidate c = ascend(ws->f, ws->vars, polish_opts);
        if (c.value > best.value) best = std::move(c);
    }

    const std::vector<int>& f = best.f_own;
    detail::Thm2Eval ev(m, nu, f);
    SolveResult r;
    r.value = best.value;
    r.status = SolveStatus::multistart_best;
    r.lower_bound = true;
    r.u_size = nu;
    r.f_table = f;
    r.action.assign(static_cast<std::size_t>(na), 0.0);
    for (int a = 0; a < na; ++a) r.action[static_cast<std::size_t>(a)] = best.vars[static_cast<std::size_t>(a)];
    double cost = 0.0;
    for (int a = 0; a < na; ++a) cost += r.action[static_cast<std::size_t>(a)] * m.cost.at(a, 0);
    r.achieved_cost = cost;
    for (int se = 0; se < nse; ++se)
        for (int a = 0; a < na; ++a) {
            r.row_keys.emplace_back(se, a);
            const int off = ev.row_offset(se, a);
            r.rows.emplace_back(best.vars.begin() + off, best.vars.begin() + off + nu);
        }
    return r;
}

// Two-sided probing: decoder-action distribution on a grid, budget split via
// a shared multiplier across the per-action strategy channels.
inline SolveResult solve_thm4(const ProbingModel& m, double gamma, const SolveOptions& opts = {}) {
    detail::check_feasible_budget(m, gamma, "solve_thm4");
    std::int64_t count = detail::strategy_count(m);
    if (count > opts.strategy_cap)
        throw std::invalid_argument("solve_thm4: strategy space size " + std::to_string(count) +
                                    " exceeds cap " + std::to_string(opts.strategy_cap));
    const int nad = m.Ad.size();
    std::vector<StrategyAtom> atoms;
    for (std::int64_t i = 0; i < count; ++i) atoms.push_back(detail::strategy_atom(m, i));

    std::vector<BaChannel> channels;
    std::vector<std::vector<double>> costs;
    for (int ad = 0; ad < nad; ++ad) {
        channels.push_back(detail::strategy_channel(m, ad, atoms));
        std::vector<double> c(atoms.size());
        for (std::size_t t = 0; t < atoms.size(); ++t) c[t] = m.cost.at(atoms[t].ae, ad);
        costs.push_back(std::move(c));
    }

    if (nad == 1) {
        SolveResult ba = blahut_arimoto_constrained(channels[0], costs[0], gamma, opts.tol);
        SolveResult r = detail::pack_strategy_result(m, atoms, ba, 0);
        r.action = {1.0};
        return r;
    }

    // candidate decoder-action distributions
    std::vector<std::vector<double>> pads;
    if (nad == 2) {
        for (double b : uniform_grid(0.0, 1.0, opts.ad_grid)) pads.push_back({1.0 - b, b});
    } else {
        int steps = std::max(2, opts.ad_grid / 4);
        std::vector<double> probe(static_cast<std::size_t>(nad), 0.0);
        std::function<void(int, int)> rec = [&](int a, int left) {
            if (a == nad - 1) {
                probe[static_cast<std::size_t>(a)] = static_cast<double>(left) / steps;
                pads.push_back(probe);
                return;
            }
            for (int i = 0; i <= left; ++i) {
                probe[static_cast<std::size_t>(a)] = static_cast<double>(i) / steps;
                rec(a + 1, left - i);
            }
        };
        rec(0, steps);
    }

    struct Inner {
        double value = -1.0;
        std::vector<std::vector<double>> p_ad;
        double cost = 0.0;
    };
    auto solve_split = [&](const std::vector<double>& pad) -> Inner {
        Inner out;
        double min_cost = 0.0;
        for (int ad = 0; ad < nad; ++ad)
            min_cost += pad[static_cast<std::size_t>(ad)] *
                        *std::min_element(costs[static_cast<std::size_t>(ad)].begin(),
                                          costs[static_cast<std::size_t>(ad)].end());
        if (min_cost > gamma + 1e-9) return out; // infeasible split
        std::vector<std::vector<double>> warm(static_cast<std::size_t>(nad));
        auto run_mu = [&](double mu) {
            std::vector<detail::BaState> states;
            double tot_cost = 0.0, tot_info = 0.0;
            for (int ad = 0; ad < nad; ++ad) {
                double w = pad[static_cast<std::size_t>(ad)];
                detail::BaState st;
                if (w > 0.0) {
                    auto& wp = warm[static_cast<std::size_t>(ad)];
                    st = detail::ba_fixed_multiplier(channels[static_cast<std::size_t>(ad)],
                                                     costs[static_cast<std::size_t>(ad)], mu, gamma,
                                                     opts.tol, 8000, wp.empty() ? nullptr : &wp);
                    wp = st.p;
                    tot_cost += w * st.cost;
                    tot_info += w * st.info_bits;
                }
                states.push_back(std::move(st));
            }
            return std::tuple<std::vector<detail::BaState>, double, double>(std::move(states),
                                                                            tot_cost, tot_info);
        };
        auto [st0, cost0, info0] = run_mu(0.0);
        if (cost0 <= gamma + 1e-9) {
            out.value = info0;
            out.cost = cost0;
            for (auto& s : st0) out.p_ad.push_back(s.p);
            return out;
        }
        double lo = 0.0, hi = 1.0;
        auto [sth, costh, infoh] = run_mu(hi);
        int guard = 0;
        while (costh > gamma + 1e-9 && guard++ < 80) {
            lo = hi;
            hi *= 2.0;
            std::tie(sth, costh, infoh) = run_mu(hi);
        }
        auto stl = st0;
        double costl = cost0;
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo + hi);
            auto [stm, costm, infom] = run_mu(mid);
            if (costm > gamma + 1e-9) {
                lo = mid;
                stl = std::move(stm);
                costl = costm;
            } else {
                hi = mid;
                sth = std::move(stm);
                costh = costm;
                infoh = infom;
            }
        }
        out.value = infoh;
        out.cost = costh;
        for (auto& s : sth) out.p_ad.push_back(s.p);
        // mix the bracketing solutions to spend the budget exactly
        if (costl > costh + 1e-15) {
            double lam = std::clamp((gamma - costh) / (costl - costh), 0.0, 1.0);
            double mix_info = 0.0, mix_cost = 0.0;
            std::vector<std::vector<double>> mix;
            for (int ad = 0; ad < nad; ++ad) {
                double w = pad[static_cast<std::size_t>(ad)];
                std::vector<double> p(atoms.size(), 0.0);
                if (w > 0.0) {
                    for (std::size_t t = 0; t < atoms.size(); ++t)
                        p[t] = lam * stl[static_cast<std::size_t>(ad)].p[t] +
                               (1.0 - lam) * sth[static_cast<std::size_t>(ad)].p[t];
                    mix_info += w * detail::info_bits_of(channels[static_cast<std::size_t>(ad)], p);
                    for (std::size_t t = 0; t < atoms.size(); ++t)
                        mix_cost += w * p[t] * costs[static_cast<std::size_t>(ad)][t];
                }
                mix.push_back(std::move(p));
            }
            if (mix_cost <= gamma + 1e-9 && mix_info > out.value) {
                out.value = mix_info;
                out.cost = mix_cost;
                out.p_ad = std::move(mix);
            }
        }
        return out;
    };

    std::vector<Inner> results(pads.size());
    parallel_for(pads.size(), [&](std::size_t i) { results[i] = solve_split(pads[i]); });

    std::size_t best_i = pads.size();
    for (std::size_t i = 0; i < pads.size(); ++i)
        if (results[i].value >= 0.0 && (best_i == pads.size() || results[i].value > results[best_i].value))
            best_i = i;
    if (best_i == pads.size()) throw std::invalid_argument("solve_thm4: no feasible split");

    // one refinement pass around the incumbent (binary decoder action only)
    if (nad == 2 && opts.ad_grid >= 3) {
        double b = pads[best_i][1];
        double step = 1.0 / (opts.ad_grid - 1);
        std::vector<std::vector<double>> fine;
        for (double t : uniform_grid(std::max(0.0, b - step), std::min(1.0, b + step), opts.ad_grid))
            fine.push_back({1.0 - t, t});
        std::vector<Inner> fres(fine.size());
        parallel_for(fine.size(), [&](std::size_t i) { fres[i] = solve_split(fine[i]); });
        for (std::size_t i = 0; i < fine.size(); ++i)
            if (fres[i].value > results[best_i].value) {
                results[best_i] = fres[i];
                pads[best_i] = fine[i];
            }
    }

    const Inner& win = results[best_i];
    SolveResult r;
    r.value = win.value;
    r.achieved_cost = win.cost;
    r.status = SolveStatus::multistart_best; // decoder grid resolution may bind
    r.action = pads[best_i];
    for (int ad = 0; ad < nad; ++ad) {
        if (pads[best_i][static_cast<std::size_t>(ad)] <= 0.0 || win.p_ad.empty()) continue;
        const auto& p = win.p_ad[static_cast<std::size_t>(ad)];
        for (std::size_t t = 0; t < atoms.size(); ++t)
            if (p[t] > 1e-12) {
                r.strategies.push_back(atoms[t]);
                r.strategy_probs.push_back(p[t]);
                r.strategy_ad.push_back(ad);
            }
    }
    r.u_size = static_cast<int>(r.strategies.size());
    return r;
}

} // namespace probecap
