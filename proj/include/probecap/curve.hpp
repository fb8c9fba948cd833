#pragma once

// Cost-capacity curves: gamma sweeps with shape flags, cutoff detection,
// the upper concave envelope, the time-sharing baseline, and CSV output.

#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "probecap/solver.hpp"

namespace probecap {

struct SweepCurve {
    std::vector<double> gammas;
    std::vector<double> values;
    std::vector<SolveResult> points;
    std::vector<std::string> errors; // empty string = point solved
    bool monotone = false;
    bool concave = false;
    double flag_tol = 2e-3;

    bool all_solved() const {
        for (const auto& e : errors)
            if (!e.empty()) return false;
        return true;
    }
};

inline void recompute_flags(SweepCurve& c) {
    c.monotone = false;
    c.concave = false;
    if (!c.all_solved() || c.values.empty()) return;
    for (double v : c.values)
        if (!std::isfinite(v)) return;
    bool mono = true;
    for (std::size_t i = 0; i + 1 < c.values.size(); ++i)
        if (c.values[i + 1] < c.values[i] - c.flag_tol) mono = false;
    bool conc = true;
    for (std::size_t i = 1; i + 1 < c.values.size(); ++i) {
        double span = c.gammas[i + 1] - c.gammas[i - 1];
        if (span <= 0.0) continue;
        double chord = (c.values[i - 1] * (c.gammas[i + 1] - c.gammas[i]) +
                        c.values[i + 1] * (c.gammas[i] - c.gammas[i - 1])) /
                       span;
        if (c.values[i] < chord - c.flag_tol) conc = false;
    }
    c.monotone = mono;
    c.concave = conc;
}

// Per-point sweep of an arbitrary value function. Points are independent and
// evaluated in parallel; a failed point records its error and poisons the
// shape flags, not the sweep.
inline SweepCurve sweep_fn(const std::vector<double>& gammas,
                           const std::function<SolveResult(double)>& solve_at,
                           double flag_tol = 2e-3) {
    for (std::size_t i = 0; i + 1 < gammas.size(); ++i)
        if (!(gammas[i] < gammas[i + 1]))
            throw std::invalid_argument("sweep: grid must be strictly increasing");
    SweepCurve c;
    c.flag_tol = flag_tol;
    c.gammas = gammas;
    c.values.assign(gammas.size(), std::numeric_limits<double>::quiet_NaN());
    c.points.assign(gammas.size(), SolveResult{});
    c.errors.assign(gammas.size(), "");
    parallel_for(gammas.size(), [&](std::size_t i) {
        try {
            c.points[i] = solve_at(gammas[i]);
            c.values[i] = c.points[i].value;
        } catch (const std::exception& e) {
            c.errors[i] = e.what();
        }
    });
    recompute_flags(c);
    return c;
}

using PointSolver = std::function<SolveResult(const ProbingModel&, double)>;

inline SweepCurve sweep(const PointSolver& solver, const ProbingModel& m,
                        const std::vector<double>& gammas, double flag_tol = 2e-3) {
    return sweep_fn(gammas, [&](double g) { return solver(m, g); }, flag_tol);
}

// Smallest grid budget whose value already reaches the curve maximum within
// tol, refined by bisection when a point solver is supplied. The default tol
// is small because these curves approach their plateau quadratically.
inline double cutoff_point(const SweepCurve& c, double tol = 2e-5,
                           const std::function<double(double)>& value_at = nullptr) {
    if (c.values.empty() || !c.all_solved())
        throw std::invalid_argument("cutoff_point: curve has unsolved points");
    for (std::size_t i = 0; i + 1 < c.values.size(); ++i)
        if (c.values[i + 1] < c.values[i] - tol)
            throw std::runtime_error("cutoff_point: curve not nondecreasing within tol at gamma=" +
                                     std::to_string(c.gammas[i + 1]));
    double vmax = *std::max_element(c.values.begin(), c.values.end());
    std::size_t idx = c.values.size() - 1;
    for (std::size_t i = 0; i < c.values.size(); ++i)
        if (c.values[i] >= vmax - tol) {
            idx = i;
            break;
        }
    if (idx == 0 || !value_at) return c.gammas[idx];
    double lo = c.gammas[idx - 1], hi = c.gammas[idx];
    for (int it = 0; it < 40 && hi - lo > 1e-7; ++it) {
        double mid = 0.5 * (lo + hi);
        if (value_at(mid) >= vmax - tol)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

// Least concave majorant over the grid (upper hull, interpolated back onto
// the grid points). Identity for curves that are already concave.
inline SweepCurve upper_concave_envelope(const SweepCurve& c) {
    if (!c.all_solved())
        throw std::invalid_argument("upper_concave_envelope: curve has unsolved points");
    const std::size_t n = c.values.size();
    SweepCurve out = c;
    if (n < 3) {
        recompute_flags(out);
        return out;
    }
    std::vector<std::size_t> hull;
    for (std::size_t i = 0; i < n; ++i) {
        while (hull.size() >= 2) {
            std::size_t a = hull[hull.size() - 2], b = hull[hull.size() - 1];
            double slope_ab = (c.values[b] - c.values[a]) / (c.gammas[b] - c.gammas[a]);
            double slope_bi = (c.values[i] - c.values[b]) / (c.gammas[i] - c.gammas[b]);
            if (slope_ab <= slope_bi + 1e-15)
                hull.pop_back(); // b lies under the chord a--i
            else
                break;
        }
        hull.push_back(i);
    }
    std::size_t seg = 0;
    for (std::size_t i = 0; i < n; ++i) {
        while (seg + 1 < hull.size() && c.gammas[hull[seg + 1]] < c.gammas[i]) ++seg;
        if (seg + 1 >= hull.size()) {
            out.values[i] = c.values[hull.back()];
            continue;
        }
        std::size_t a = hull[seg], b = hull[seg + 1];
        double t = (c.gammas[i] - c.gammas[a]) / (c.gammas[b] - c.gammas[a]);
        out.values[i] = std::max(c.values[i], (1.0 - t) * c.values[a] + t * c.values[b]);
    }
    recompute_flags(out);
    return out;
}

// The straight line between the endpoint capacities: mixing the no-probing
// and always-probing operating points.
inline SweepCurve time_sharing_baseline(double c0, double c1, const std::vector<double>& gammas) {
    SweepCurve c;
    c.gammas = gammas;
    for (double g : gammas) {
        SolveResult p;
        p.value = (1.0 - g) * c0 + g * c1;
        p.achieved_cost = g;
        p.status = SolveStatus::converged;
        c.points.push_back(p);
        c.values.push_back(p.value);
        c.errors.emplace_back();
    }
    recompute_flags(c);
    return c;
}

inline void write_curve_csv(std::ostream& out, const SweepCurve& c) {
    out << "gamma,value_bits,achieved_cost,status\n";
    out << std::setprecision(12);
    for (std::size_t i = 0; i < c.gammas.size(); ++i) {
        out << c.gammas[i] << ",";
        if (c.errors[i].empty())
            out << c.values[i] << "," << c.points[i].achieved_cost << ","
                << to_string(c.points[i].status);
        else
            out << "nan,nan,error";
        out << "\n";
    }
}

inline std::string curve_csv(const SweepCurve& c) {
    std::ostringstream ss;
    ss.imbue(std::locale::classic());
    write_curve_csv(ss, c);
    return ss.str();
}

} // namespace probecap
