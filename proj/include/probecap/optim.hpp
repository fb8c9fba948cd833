#pragma once

// Small dense constrained-ascent toolkit: Euclidean simplex projection,
// Dykstra's alternating projection for simplex-product/halfspace
// intersections, and projected gradient ascent with Armijo backtracking.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "probecap/prob.hpp"

namespace probecap {

// Euclidean projection of v onto the probability simplex, in place.
inline void project_simplex(std::span<double> v) {
    const std::size_t n = v.size();
    static thread_local std::vector<double> sorted;
    sorted.assign(v.begin(), v.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<double>());
    double cumsum = 0.0, tau = 0.0;
    std::size_t k = 0;
    for (std::size_t i = 0; i < n; ++i) {
        cumsum += sorted[i];
        double t = (cumsum - 1.0) / static_cast<double>(i + 1);
        if (sorted[i] - t > 0.0) {
            tau = t;
            k = i + 1;
        }
    }
    (void)k;
    for (auto& x : v) x = std::max(0.0, x - tau);
}

// Variable layout: a flat vector split into consecutive simplex blocks.
struct SimplexBlocks {
    std::vector<std::size_t> offsets; // block k spans [offsets[k], offsets[k+1])

    std::size_t block_count() const { return offsets.empty() ? 0 : offsets.size() - 1; }
    std::size_t dim() const { return offsets.empty() ? 0 : offsets.back(); }

    static SimplexBlocks from_sizes(const std::vector<std::size_t>& sizes) {
        SimplexBlocks b;
        b.offsets.push_back(0);
        for (std::size_t s : sizes) b.offsets.push_back(b.offsets.back() + s);
        return b;
    }

    void project(std::span<double> v) const {
        for (std::size_t k = 0; k + 1 < offsets.size(); ++k)
            project_simplex(v.subspan(offsets[k], offsets[k + 1] - offsets[k]));
    }
};

// One linear constraint coef . v <= bound over the flat variable vector.
struct Halfspace {
    std::vector<double> coef;
    double bound = 0.0;

    double violation(std::span<const double> v) const {
        double dot = 0.0;
        for (std::size_t i = 0; i < coef.size(); ++i) dot += coef[i] * v[i];
        return dot - bound;
    }

    void project(std::span<double> v) const {
        double excess = violation(v);
        if (excess <= 0.0) return;
        double norm2 = 0.0;
        for (double c : coef) norm2 += c * c;
        if (norm2 <= 0.0) return;
        double t = excess / norm2;
        for (std::size_t i = 0; i < coef.size(); ++i) v[i] -= t * coef[i];
    }
};

namespace detail_optim {

// Dykstra's alternating projection for simplex blocks coupled by halfspaces.
inline void dykstra(std::span<double> v, const SimplexBlocks& blocks,
                    const std::vector<Halfspace>& halfspaces, int max_iters, double tol) {
    const std::size_t n = v.size();
    const std::size_t sets = 1 + halfspaces.size();
    std::vector<std::vector<double>> corrections(sets, std::vector<double>(n, 0.0));
    std::vector<double> prev(n), before(n);
    for (int it = 0; it < max_iters; ++it) {
        std::copy(v.begin(), v.end(), prev.begin());
        for (std::size_t s = 0; s < sets; ++s) {
            auto& corr = corrections[s];
            for (std::size_t i = 0; i < n; ++i) v[i] += corr[i];
            std::copy(v.begin(), v.end(), before.begin());
            if (s == 0)
                blocks.project(v);
            else
                halfspaces[s - 1].project(v);
            for (std::size_t i = 0; i < n; ++i) corr[i] = before[i] - v[i];
        }
        double delta = 0.0;
        for (std::size_t i = 0; i < n; ++i) delta = std::max(delta, std::abs(v[i] - prev[i]));
        if (delta < tol) break;
    }
    blocks.project(v); // final pass keeps rows exactly stochastic
}

} // namespace detail_optim

// Projection onto (product of simplices) ∩ (halfspaces). Blocks untouched by
// any halfspace project independently; only the coupled blocks go through
// Dykstra's algorithm.
inline void project_feasible(std::span<double> v, const SimplexBlocks& blocks,
                             const std::vector<Halfspace>& halfspaces, int max_iters = 300,
                             double tol = 1e-13) {
    if (halfspaces.empty()) {
        blocks.project(v);
        return;
    }
    const std::size_t nb = blocks.block_count();
    std::vector<bool> touched(nb, false);
    for (const auto& hs : halfspaces)
        for (std::size_t k = 0; k < nb; ++k) {
            if (touched[k]) continue;
            for (std::size_t i = blocks.offsets[k]; i < blocks.offsets[k + 1]; ++i)
                if (i < hs.coef.size() && hs.coef[i] != 0.0) {
                    touched[k] = true;
                    break;
                }
        }
    bool any_free = false;
    for (std::size_t k = 0; k < nb; ++k)
        if (!touched[k]) {
            project_simplex(v.subspan(blocks.offsets[k], blocks.offsets[k + 1] - blocks.offsets[k]));
            any_free = true;
        }
    std::size_t touched_count = 0;
    for (std::size_t k = 0; k < nb; ++k) touched_count += touched[k];
    if (touched_count == 0) return;
    if (!any_free) {
        detail_optim::dykstra(v, blocks, halfspaces, max_iters, tol);
        return;
    }
    // gather the coupled coordinates into a compact subproblem
    std::vector<std::size_t> map;
    std::vector<std::size_t> sub_sizes;
    for (std::size_t k = 0; k < nb; ++k)
        if (touched[k]) {
            sub_sizes.push_back(blocks.offsets[k + 1] - blocks.offsets[k]);
            for (std::size_t i = blocks.offsets[k]; i < blocks.offsets[k + 1]; ++i) map.push_back(i);
        }
    std::vector<double> sub(map.size());
    for (std::size_t i = 0; i < map.size(); ++i) sub[i] = v[map[i]];
    std::vector<Halfspace> sub_hs;
    for (const auto& hs : halfspaces) {
        Halfspace h;
        h.bound = hs.bound;
        h.coef.resize(map.size());
        for (std::size_t i = 0; i < map.size(); ++i)
            h.coef[i] = map[i] < hs.coef.size() ? hs.coef[map[i]] : 0.0;
        sub_hs.push_back(std::move(h));
    }
    detail_optim::dykstra(sub, SimplexBlocks::from_sizes(sub_sizes), sub_hs, max_iters, tol);
    for (std::size_t i = 0; i < map.size(); ++i) v[map[i]] = sub[i];
}

struct AscentOptions {
    int max_iters = 4000;
    double tol = 1e-10;        // stop when the objective gain falls below this
    double armijo = 1e-4;
    double shrink = 0.5;
    double init_step = 1.0;
    double min_step = 1e-12;
};

struct AscentResult {
    double value = 0.0;
    std::vector<double> trace; // objective after each accepted step
    bool converged = false;
};

// Maximizes a smooth objective over the feasible set by projected gradient
// ascent with backtracking. `eval` fills the gradient when grad != nullptr
// and returns the objective. The trace is nondecreasing by construction.
inline AscentResult projected_gradient_ascent(
    std::vector<double>& x, const SimplexBlocks& blocks, const std::vector<Halfspace>& halfspaces,
    const std::function<double(std::span<const double>, std::vector<double>*)>& eval,
    const AscentOptions& opts = {}) {
    project_feasible(x, blocks, halfspaces);

    AscentResult res;
    std::vector<double> grad(x.size()), trial(x.size());
    double value = eval(x, &grad);
    res.trace.push_back(value);
    double step = opts.init_step;

    for (int it = 0; it < opts.max_iters; ++it) {
        bool accepted = false;
        double new_value = value;
        while (step >= opts.min_step) {
            for (std::size_t i = 0; i < x.size(); ++i) trial[i] = x[i] + step * grad[i];
            project_feasible(trial, blocks, halfspaces);
            double dot = 0.0, move = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                double d = trial[i] - x[i];
                dot += grad[i] * d;
                move = std::max(move, std::abs(d));
            }
            if (move < 1e-15) break; // projected point did not move
            new_value = eval(trial, nullptr);
            if (new_value >= value + opts.armijo * dot || new_value > value) {
                accepted = true;
                break;
            }
            step *= opts.shrink;
        }
        if (!accepted) {
            res.converged = true;
            break;
        }
        x.swap(trial);
        double gain = new_value - value;
        value = new_value;
        res.trace.push_back(value);
        value = eval(x, &grad); // refresh gradient at the accepted point
        step = std::min(opts.init_step, step * 2.0);
        if (gain < opts.tol && it > 8) {
            res.converged = true;
            break;
        }
    }
    res.value = value;
    return res;
}

} // namespace probecap
