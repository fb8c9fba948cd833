#pragma once

// Closed-form and quadrature-backed lower bounds for the two Gaussian
// examples: interference pre-cancellation with probed interference, and
// two-state fading with probed gains and power control.

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "probecap/curve.hpp"

namespace probecap {

inline double awgn_capacity(double snr) {
    if (snr < 0.0) throw std::domain_error("awgn_capacity: negative snr");
    return 0.5 * std::log2(1.0 + snr);
}

inline double gaussian_entropy_bits(double variance) {
    if (variance <= 0.0) throw std::domain_error("gaussian_entropy_bits: variance must be positive");
    return 0.5 * std::log2(2.0 * std::numbers::pi_v<double> * std::numbers::e_v<double> * variance);
}

// Zero-mean Gaussian scale mixture.
struct GaussianMixture {
    std::vector<double> weights;
    std::vector<double> variances;

    GaussianMixture(std::vector<double> w, std::vector<double> var)
        : weights(std::move(w)), variances(std::move(var)) {
        if (weights.empty() || weights.size() != variances.size())
            throw std::invalid_argument("GaussianMixture: shape mismatch");
        check_distribution(weights, 1e-9, "GaussianMixture weights");
        for (double v : variances)
            if (!(v > 0.0)) throw std::invalid_argument("GaussianMixture: variances must be positive");
    }

    double density(double x) const {
        double g = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i) {
            if (weights[i] <= 0.0) continue;
            double v = variances[i];
            g += weights[i] * std::exp(-0.5 * x * x / v) /
                 std::sqrt(2.0 * std::numbers::pi_v<double> * v);
        }
        return g;
    }

    double max_sigma() const {
        double m = 0.0;
        for (std::size_t i = 0; i < weights.size(); ++i)
            if (weights[i] > 0.0) m = std::max(m, std::sqrt(variances[i]));
        return m;
    }
};

namespace detail {

struct SimpsonState {
    double worst_error = 0.0;
    long evals = 0;
};

template <class F>
double adaptive_simpson(const F& f, double a, double b, double fa, double fm, double fb,
                        double whole, double tol, int depth, SimpsonState& st) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    st.evals += 2;
    double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol) {
        if (depth <= 0) st.worst_error = std::max(st.worst_error, std::abs(delta) / 15.0);
        return left + right + delta / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, st) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, st);
}

template <class F>
double integrate(const F& f, double a, double b, double tol, SimpsonState& st) {
    double m = 0.5 * (a + b);
    double fa = f(a), fm = f(m), fb = f(b);
    st.evals += 3;
    double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 48, st);
}

} // namespace detail

// -int g log2 g over the real line by adaptive quadrature on +-8 sigma (the
// tail beyond is below double noise for these mixtures). Collapses to the
// closed form when only one distinct component survives.
inline double mixture_differential_entropy(const GaussianMixture& gm, double tol = 1e-7) {
    // effective components
    std::vector<double> w, var;
    for (std::size_t i = 0; i < gm.weights.size(); ++i)
        if (gm.weights[i] > kZeroFloor) {
            w.push_back(gm.weights[i]);
            var.push_back(gm.variances[i]);
        }
    if (w.empty()) throw std::invalid_argument("mixture_differential_entropy: empty mixture");
    bool all_equal = true;
    for (double v : var)
        if (std::abs(v - var[0]) > 1e-14 * std::max(1.0, var[0])) all_equal = false;
    if (all_equal) return gaussian_entropy_bits(var[0]);

    GaussianMixture eff{std::vector<double>(w), std::vector<double>(var)};
    // renormalize in case tiny weights were dropped
    double tw = 0.0;
    for (double x : eff.weights) tw += x;
    for (auto& x : eff.weights) x /= tw;

    double half_range = 8.0 * eff.max_sigma();
    auto integrand = [&eff](double x) {
        double g = eff.density(x);
        if (g <= 1e-300) return 0.0;
        return -g * std::log2(g);
    };
    detail::SimpsonState st;
    double h = 2.0 * detail::integrate(integrand, 0.0, half_range, 0.5 * tol, st);
    if (st.worst_error > tol)
        throw std::runtime_error("mixture_differential_entropy: quadrature error estimate " +
                                 std::to_string(st.worst_error) + " exceeds tol");
    return h;
}

// ---- interference pre-cancellation with probed interference ---------------------

struct DirtyPaperParams {
    double P = 1.0; // input power
    double Q = 1.0; // interference power
    double N = 1.0; // noise power
    double gamma = 0.0;

    DirtyPaperParams(double P_, double Q_, double N_, double gamma_)
        : P(P_), Q(Q_), N(N_), gamma(gamma_) {
        if (P < 0 || Q < 0 || N <= 0) throw std::invalid_argument("DirtyPaperParams: bad powers");
        if (gamma < 0 || gamma > 1) throw std::invalid_argument("DirtyPaperParams: gamma outside [0,1]");
    }
};

struct PowerSplitPoint {
    double value = 0.0;
    double P1 = 0.0, P2 = 0.0;
};

// Power-splitting lower bound: unprobed symbols carry P1, probed symbols P2,
// budget tight at (1-gamma) P1 + gamma P2 = P. The probed fraction achieves
// the interference-free rate, the rest faces interference plus noise, and
// the mixture term pays for the receiver not knowing the action.
inline PowerSplitPoint dirty_paper_lower(const DirtyPaperParams& p, int grid = 201) {
    const double g = p.gamma;
    auto objective = [&](double p1, double p2) {
        double v0 = p1 + p.Q + p.N, v1 = p2 + p.Q + p.N;
        double hg;
        if (g <= 0.0)
            hg = gaussian_entropy_bits(v0);
        else if (g >= 1.0)
            hg = gaussian_entropy_bits(v1);
        else
            hg = mixture_differential_entropy(GaussianMixture({1.0 - g, g}, {v0, v1}));
        double val = hg;
        if (g < 1.0) val -= (1.0 - g) * gaussian_entropy_bits(v0);
        if (g > 0.0) val -= g * gaussian_entropy_bits(v1);
        if (g < 1.0) val += (1.0 - g) * awgn_capacity(p1 / (p.Q + p.N));
        if (g > 0.0) val += g * awgn_capacity(p2 / p.N);
        return val;
    };

    PowerSplitPoint best;
    if (g <= 0.0) {
        best.P1 = p.P;
        best.P2 = 0.0;
        best.value = objective(best.P1, best.P2);
        return best;
    }
    if (g >= 1.0) {
        best.P1 = 0.0;
        best.P2 = p.P;
        best.value = objective(best.P1, best.P2);
        return best;
    }

    auto eval_p2 = [&](double p2) {
        double p1 = (p.P - g * p2) / (1.0 - g);
        return objective(p1, p2);
    };
    const double p2_max = p.P / g;
    best.value = -std::numeric_limits<double>::infinity();
    auto consider = [&](double p2) {
        if (p2 < 0.0 || p2 > p2_max) return;
        double v = eval_p2(p2);
        if (v > best.value) {
            best.value = v;
            best.P2 = p2;
            best.P1 = (p.P - g * p2) / (1.0 - g);
        }
    };
    for (int i = 0; i < grid; ++i) consider(p2_max * i / (grid - 1));
    consider(p.P); // equal split: provably at least time sharing
    // one refinement pass around the incumbent
    double step = p2_max / (grid - 1);
    double center = best.P2;
    for (int i = 0; i < grid; ++i)
        consider(std::clamp(center - step + 2.0 * step * i / (grid - 1), 0.0, p2_max));
    return best;
}

// ---- two-state fading with probed gains ------------------------------------------

struct FadingParams {
    double P = 1.0, N = 1.0, B = 1.0;
    double g1 = 0.01, g2 = 1.0;
    double gamma = 0.0;

    FadingParams(double P_, double N_, double B_, double g1_, double g2_, double gamma_)
        : P(P_), N(N_), B(B_), g1(g1_), g2(g2_), gamma(gamma_) {
        if (P <= 0 || N <= 0 || B <= 0 || g1 <= 0 || g2 <= 0)
            throw std::invalid_argument("FadingParams: parameters must be positive");
        if (gamma < 0 || gamma > 1) throw std::invalid_argument("FadingParams: gamma outside [0,1]");
        double snr1 = snr_weak(), snr2 = snr_strong();
        if (!(snr1 < snr2 / (1.0 + 2.0 * snr2)))
            throw std::invalid_argument("FadingParams: requires snr1 < snr2/(1+2 snr2)");
    }

    double snr_weak() const { return P * g1 / (N * B); }
    double snr_strong() const { return P * g2 / (N * B); }
};

struct FadingSplitPoint {
    double value = 0.0;
    double Pstar = 0.0, P1 = 0.0, P2 = 0.0;
};

inline double fading_capacity_endpoint0(const FadingParams& p) {
    return 0.5 * p.B * std::log2(1.0 + p.snr_weak()) + 0.5 * p.B * std::log2(1.0 + p.snr_strong());
}
inline double fading_capacity_endpoint1(const FadingParams& p) {
    return 0.5 * p.B * std::log2(1.0 + 2.0 * p.snr_strong());
}

// Gaussian-input lower bound with per-observation power control: unprobed
// symbols carry Pstar, observed weak/strong gains carry P1/P2 under
// (1-gamma) Pstar + (gamma/2)(P1+P2) <= P (tight at the optimum).
inline FadingSplitPoint fading_lower(const FadingParams& p, int grid = 201) {
    const double g = p.gamma, nb = p.N * p.B;

    auto channel_entropy = [&](double gain, double p_unobs, double p_obs) {
        if (g <= 0.0) return gaussian_entropy_bits(nb + p_unobs * gain);
        if (g >= 1.0) return gaussian_entropy_bits(nb + p_obs * gain);
        double va = nb + p_unobs * gain, vb = nb + p_obs * gain;
        if (std::abs(va - vb) < 1e-14 * std::max(1.0, va)) return gaussian_entropy_bits(va);
        return mixture_differential_entropy(GaussianMixture({1.0 - g, g}, {va, vb}));
    };
    auto objective = [&](double ps, double p1, double p2) {
        double h1 = channel_entropy(p.g1, ps, p1);
        double h2 = channel_entropy(p.g2, ps, p2);
        return 2.0 * p.B * (0.5 * (h1 + h2) - gaussian_entropy_bits(nb));
    };

    FadingSplitPoint best;
    best.value = -std::numeric_limits<double>::infinity();
    auto consider = [&](double ps, double p1, double p2) {
        if (ps < -1e-12 || p1 < -1e-12 || p2 < -1e-12) return;
        double v = objective(std::max(ps, 0.0), std::max(p1, 0.0), std::max(p2, 0.0));
        if (v > best.value) {
            best.value = v;
            best.Pstar = std::max(ps, 0.0);
            best.P1 = std::max(p1, 0.0);
            best.P2 = std::max(p2, 0.0);
        }
    };

    if (g <= 0.0) {
        consider(p.P, 0.0, 0.0);
        return best;
    }
    if (g >= 1.0) {
        // 1-D sweep over the weak-state power
        for (int i = 0; i < grid; ++i) {
            double p1 = 2.0 * p.P * i / (grid - 1);
            consider(0.0, p1, 2.0 * p.P - p1);
        }
        consider(0.0, 0.0, 2.0 * p.P);
        return best;
    }

    auto scan = [&](double ps_lo, double ps_hi, double p1_cap_scale) {
        for (int i = 0; i < grid; ++i) {
            double ps = ps_lo + (ps_hi - ps_lo) * i / (grid - 1);
            double rem = p.P - (1.0 - g) * ps; // budget left for the observed states
            if (rem < -1e-12) continue;
            double p1_cap = std::max(0.0, 2.0 * rem / g) * p1_cap_scale;
            for (int j = 0; j < grid; ++j) {
                double p1 = p1_cap * j / (grid - 1);
                double p2 = 2.0 * rem / g - p1;
                consider(ps, p1, p2);
            }
        }
    };
    scan(0.0, p.P / (1.0 - g), 1.0);
    consider(p.P, 0.0, 2.0 * p.P); // the time-sharing power point
    // refine once around the incumbent
    double ps_step = p.P / (1.0 - g) / (grid - 1);
    double ps_lo = std::max(0.0, best.Pstar - ps_step);
    double ps_hi = std::min(p.P / (1.0 - g), best.Pstar + ps_step);
    if (ps_hi > ps_lo) scan(ps_lo, ps_hi, 1.0);
    return best;
}

} // namespace probecap
