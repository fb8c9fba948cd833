#pragma once

// Problem instances: a DMC P(Y|X,S) with i.i.d. states, a probe kernel
// P(Se,Sd|S,Ae,Ad) describing what each side learns from its action, an
// action cost table and a budget. Builders for the canonical examples and
// the per-theorem joint-law factorizations live here too.

#include <optional>
#include <string>
#include <vector>

#include "probecap/prob.hpp"

namespace probecap {

struct CostTable {
    int ae_size = 1;
    int ad_size = 1;
    std::vector<double> cost; // row-major (ae, ad), all >= 0

    CostTable() = default;
    CostTable(int ae, int ad, std::vector<double> c)
        : ae_size(ae), ad_size(ad), cost(std::move(c)) {
        if (ae_size < 1 || ad_size < 1 ||
            cost.size() != static_cast<std::size_t>(ae_size) * static_cast<std::size_t>(ad_size))
            throw std::invalid_argument("CostTable: shape mismatch");
        for (double v : cost)
            if (!(v >= 0.0) || !std::isfinite(v))
                throw std::invalid_argument("CostTable: costs must be nonnegative");
    }

    // encoder-only convenience: per-a vector
    static CostTable encoder_only(std::vector<double> c) {
        const int n = static_cast<int>(c.size());
        return CostTable(n, 1, std::move(c));
    }

    double at(int ae, int ad) const {
        return cost[static_cast<std::size_t>(ae) * static_cast<std::size_t>(ad_size) +
                    static_cast<std::size_t>(ad)];
    }

    double min_cost() const {
        double m = cost[0];
        for (double v : cost) m = std::min(m, v);
        return m;
    }
    double max_cost() const {
        double m = cost[0];
        for (double v : cost) m = std::max(m, v);
        return m;
    }
};

// Optional linear input constraint P(X = symbol) <= bound.
struct InputConstraint {
    int x_symbol = 0;
    double bound = 1.0;
};

struct ProbingModel {
    std::string name;
    Alphabet S, Se, Sd, Ae, Ad, X, Y;
    ProbDist state;     // P_S
    CondKernel channel; // inputs (X,S), output Y
    CondKernel probe;   // inputs (S,Ae,Ad), outputs (Se,Sd)
    CostTable cost;
    double budget = 0.0;
    std::optional<InputConstraint> input_constraint;

    bool encoder_only() const { return Ad.size() == 1; }

    double probe_prob(int s, int ae, int ad, int se, int sd) const {
        const int in[3] = {s, ae, ad};
        const int out[2] = {se, sd};
        return probe.prob(in, out);
    }
    double channel_prob(int x, int s, int y) const {
        const int in[2] = {x, s};
        const int out[1] = {y};
        return channel.prob(in, out);
    }

    // P(se | s, ae, ad), decoder side summed out
    double encoder_probe_prob(int s, int ae, int ad, int se) const {
        double p = 0.0;
        for (int sd = 0; sd < Sd.size(); ++sd) p += probe_prob(s, ae, ad, se, sd);
        return p;
    }

    // true when Sd reproduces S exactly for every action pair
    bool decoder_has_full_csi() const {
        if (Sd.size() != S.size()) return false;
        for (int s = 0; s < S.size(); ++s)
            for (int ae = 0; ae < Ae.size(); ++ae)
                for (int ad = 0; ad < Ad.size(); ++ad) {
                    double p = 0.0;
                    for (int se = 0; se < Se.size(); ++se) p += probe_prob(s, ae, ad, se, s);
                    if (std::abs(p - 1.0) > 1e-9) return false;
                }
        return true;
    }
};

inline void validate(const ProbingModel& m) {
    if (m.channel.inputs.size() != 2 || !(m.channel.inputs[0] == m.X) ||
        !(m.channel.inputs[1] == m.S) || m.channel.outputs.size() != 1 ||
        !(m.channel.outputs[0] == m.Y))
        throw std::invalid_argument("model '" + m.name + "': channel kernel shape mismatch");
    if (m.probe.inputs.size() != 3 || !(m.probe.inputs[0] == m.S) ||
        !(m.probe.inputs[1] == m.Ae) || !(m.probe.inputs[2] == m.Ad) ||
        m.probe.outputs.size() != 2 || !(m.probe.outputs[0] == m.Se) ||
        !(m.probe.outputs[1] == m.Sd))
        throw std::invalid_argument("model '" + m.name + "': probe kernel shape mismatch");
    if (!(m.state.alphabet == m.S))
        throw std::invalid_argument("model '" + m.name + "': state distribution alphabet mismatch");
    if (m.cost.ae_size != m.Ae.size() || m.cost.ad_size != m.Ad.size())
        throw std::invalid_argument("model '" + m.name + "': cost table shape mismatch");
    if (m.budget < m.cost.min_cost() - 1e-12)
        throw std::invalid_argument("model '" + m.name + "': budget below minimum achievable cost");
    if (m.input_constraint) {
        if (m.input_constraint->x_symbol < 0 || m.input_constraint->x_symbol >= m.X.size())
            throw std::invalid_argument("model '" + m.name + "': input constraint symbol out of range");
        if (m.input_constraint->bound < 0.0)
            throw std::invalid_argument("model '" + m.name + "': input constraint bound negative");
    }
}

// ---- builders ----------------------------------------------------------------

// Observe-or-not probing: binary encoder action, cost L(a)=a. Action 1 reveals
// the state to the encoder, action 0 yields the erasure symbol "*" (index 0 of
// Se). With decoder_csi the decoder sees the state exactly, otherwise Sd is a
// singleton.
inline ProbingModel build_observe_or_not(const CondKernel& channel, const ProbDist& state_dist,
                                         bool decoder_csi, double budget,
                                         std::string name = "observe-or-not") {
    if (channel.inputs.size() != 2 || channel.outputs.size() != 1)
        throw std::invalid_argument("build_observe_or_not: channel must be P(Y|X,S)");
    const Alphabet& S = channel.inputs[1];
    if (!(state_dist.alphabet == S))
        throw std::invalid_argument("build_observe_or_not: state dist alphabet mismatch");

    ProbingModel m;
    m.name = std::move(name);
    m.S = S;
    m.X = channel.inputs[0];
    m.Y = channel.outputs[0];
    m.Ae = make_alphabet("Ae", 2);
    m.Ad = Alphabet("Ad", {"0"});

    std::vector<std::string> se_syms{"*"};
    for (const auto& s : S.symbols) se_syms.push_back(s);
    m.Se = Alphabet("Se", std::move(se_syms));
    m.Sd = decoder_csi ? Alphabet("Sd", S.symbols) : Alphabet("Sd", {"0"});

    m.state = state_dist;
    m.channel = channel;

    // deterministic probe rows
    std::vector<std::vector<double>> rows;
    const int nse = m.Se.size(), nsd = m.Sd.size();
    for (int s = 0; s < S.size(); ++s)
        for (int ae = 0; ae < 2; ++ae) {
            std::vector<double> row(static_cast<std::size_t>(nse) * nsd, 0.0);
            int se = (ae == 1) ? s + 1 : 0; // "*" sits at index 0
            int sd = decoder_csi ? s : 0;
            row[static_cast<std::size_t>(se) * nsd + sd] = 1.0;
            rows.push_back(std::move(row));
        }
    m.probe = CondKernel({S, m.Ae, m.Ad}, {m.Se, m.Sd}, std::move(rows));
    m.cost = CostTable::encoder_only({0.0, 1.0});
    m.budget = budget;
    validate(m);
    return m;
}

// Binary-state mixture channel: state 0 drives the rows (noisy on input 0,
// clean on input 1), state 1 the mirror image. alpha/beta are the noisy
// transition weights, eps = P(S=0).
inline CondKernel two_state_binary_channel(double alpha, double beta) {
    Alphabet X = make_alphabet("X", 2);
    Alphabet Y = make_alphabet("Y", 2);
    Alphabet S = make_alphabet("S", 2);
    // rows ordered (x,s); each row is a dist over y
    std::vector<std::vector<double>> rows = {
        {alpha, 1.0 - alpha}, // x=0, s=0
        {1.0, 0.0},           // x=0, s=1
        {0.0, 1.0},           // x=1, s=0
        {1.0 - beta, beta},   // x=1, s=1
    };
    return CondKernel({X, S}, {Y}, std::move(rows));
}

inline ProbingModel build_example1(double budget = 1.0) {
    const double alpha = 0.5, beta = 0.5, eps = 0.5;
    CondKernel ch = two_state_binary_channel(alpha, beta);
    ProbDist ps(ch.inputs[1], {eps, 1.0 - eps});
    return build_observe_or_not(ch, ps, /*decoder_csi=*/true, budget, "ex1");
}

inline ProbingModel build_example2(double budget = 1.0) {
    const double alpha = 0.1, delta = 0.3, eps = 0.5;
    Alphabet X = make_alphabet("X", 2);
    Alphabet Y = make_alphabet("Y", 2);
    Alphabet S = make_alphabet("S", 2);
    std::vector<std::vector<double>> rows = {
        {alpha, 1.0 - alpha},     // x=0, s=0
        {1.0 - delta, delta},     // x=0, s=1 (BSC leg)
        {0.0, 1.0},               // x=1, s=0
        {delta, 1.0 - delta},     // x=1, s=1
    };
    CondKernel ch({X, S}, {Y}, std::move(rows));
    ProbDist ps(S, {eps, 1.0 - eps});
    return build_observe_or_not(ch, ps, /*decoder_csi=*/false, budget, "ex2");
}

// Multiplier channel Y = S*X with S ~ Bern(0.5), decoder knows the state, and
// an input power constraint P(X=1) <= p0.
inline ProbingModel build_example3(double p0 = 0.25, double budget = 1.0) {
    Alphabet X = make_alphabet("X", 2);
    Alphabet Y = make_alphabet("Y", 2);
    Alphabet S = make_alphabet("S", 2);
    std::vector<std::vector<double>> rows = {
        {1.0, 0.0}, // x=0, s=0 -> y=0
        {1.0, 0.0}, // x=0, s=1 -> y=0
        {1.0, 0.0}, // x=1, s=0 -> y=0
        {0.0, 1.0}, // x=1, s=1 -> y=1
    };
    CondKernel ch({X, S}, {Y}, std::move(rows));
    ProbDist ps(S, {0.5, 0.5});
    ProbingModel m = build_observe_or_not(ch, ps, /*decoder_csi=*/true, budget, "ex3");
    m.input_constraint = InputConstraint{X.index_of("1"), p0};
    validate(m);
    return m;
}

// ---- deterministic strategy maps ---------------------------------------------

// g: (U, Ad) -> Ae and f: (U, Se, Ad) -> X, stored as flat tables.
struct StrategyPair {
    int u_size = 0, se_size = 0, ad_size = 1;
    std::vector<int> g; // size u*ad
    std::vector<int> f; // size u*se*ad

    StrategyPair() = default;
    StrategyPair(int u, int se, int ad, std::vector<int> g_, std::vector<int> f_)
        : u_size(u), se_size(se), ad_size(ad), g(std::move(g_)), f(std::move(f_)) {
        if (g.size() != static_cast<std::size_t>(u) * ad ||
            f.size() != static_cast<std::size_t>(u) * se * ad)
            throw std::invalid_argument("StrategyPair: table size mismatch");
    }

    int g_at(int u, int ad = 0) const {
        return g[static_cast<std::size_t>(u) * ad_size + ad];
    }
    int f_at(int u, int se, int ad = 0) const {
        return f[(static_cast<std::size_t>(u) * se_size + se) * ad_size + ad];
    }
};

// ---- theorem joint laws --------------------------------------------------------

namespace detail {
inline CondKernel encoder_probe_kernel(const ProbingModel& m) {
    // P(Se | S, Ae) at the fixed (singleton) decoder action
    std::vector<std::vector<double>> rows;
    for (int s = 0; s < m.S.size(); ++s)
        for (int ae = 0; ae < m.Ae.size(); ++ae) {
            std::vector<double> row(static_cast<std::size_t>(m.Se.size()), 0.0);
            for (int se = 0; se < m.Se.size(); ++se)
                row[static_cast<std::size_t>(se)] = m.encoder_probe_prob(s, ae, 0, se);
            rows.push_back(std::move(row));
        }
    return CondKernel({m.S, m.Ae}, {m.Se}, std::move(rows));
}

inline int thm2_u_bound(const ProbingModel& m) {
    return m.Ae.size() * m.S.size() * m.Se.size() * m.Sd.size() * m.X.size() + 3;
}
inline int thm3_u_bound(const ProbingModel& m) {
    return std::min(m.Y.size() * m.Sd.size(), thm2_u_bound(m));
}
inline int thm4_u_bound(const ProbingModel& m) {
    int a = m.Y.size() * m.Sd.size() * m.Ad.size();
    int b = m.S.size() * m.Ad.size() * m.Ae.size() * m.Se.size() * m.Sd.size() * m.X.size() + 4;
    return std::min(a, b);
}
} // namespace detail

// Joint over (A, S, Se, X, Y): P_A P_S P(Se|S,A) P(X|Se,A) P(Y|X,S).
// Encoder-only models.
inline JointTable joint_thm1(const ProbingModel& m, const ProbDist& pa, const CondKernel& px) {
    if (!m.encoder_only())
        throw std::invalid_argument("joint_thm1: model has decoder actions");
    if (!(pa.alphabet == m.Ae))
        throw std::invalid_argument("joint_thm1: action distribution alphabet mismatch");
    if (px.inputs.size() != 2 || !(px.inputs[0] == m.Se) || !(px.inputs[1] == m.Ae) ||
        px.outputs.size() != 1 || !(px.outputs[0] == m.X))
        throw std::invalid_argument("joint_thm1: input kernel must be P(X|Se,A)");

    std::vector<Factor> factors;
    factors.push_back(DistFactor{"A", pa});
    factors.push_back(DistFactor{"S", m.state});
    factors.push_back(KernelFactor{{"S", "A"}, {"Se"}, detail::encoder_probe_kernel(m)});
    factors.push_back(KernelFactor{{"Se", "A"}, {"X"}, px});
    factors.push_back(KernelFactor{{"X", "S"}, {"Y"}, m.channel});
    return compose(factors);
}

// Joint over (A, S, Se, Sd, U, X, Y) with auxiliary U drawn from P(U|Se,A)
// and X = f(U,Se).
inline JointTable joint_thm2(const ProbingModel& m, const ProbDist& pa, const CondKernel& pu,
                             const std::vector<int>& f_u_se) {
    if (!m.encoder_only())
        throw std::invalid_argument("joint_thm2: model has decoder actions");
    if (pu.inputs.size() != 2 || !(pu.inputs[0] == m.Se) || !(pu.inputs[1] == m.Ae) ||
        pu.outputs.size() != 1)
        throw std::invalid_argument("joint_thm2: auxiliary kernel must be P(U|Se,A)");
    const Alphabet& U = pu.outputs[0];
    if (U.size() > detail::thm2_u_bound(m))
        throw std::invalid_argument("joint_thm2: |U|=" + std::to_string(U.size()) +
                                    " exceeds cardinality bound " +
                                    std::to_string(detail::thm2_u_bound(m)));
    if (f_u_se.size() != static_cast<std::size_t>(U.size()) * m.Se.size())
        throw std::invalid_argument("joint_thm2: f table size mismatch");

    std::vector<Factor> factors;
    factors.push_back(DistFactor{"A", pa});
    factors.push_back(DistFactor{"S", m.state});
    factors.push_back(DistFactor{"Ad", ProbDist::point_mass(m.Ad, 0)}); // singleton
    factors.push_back(KernelFactor{{"S", "A", "Ad"}, {"Se", "Sd"}, m.probe});
    factors.push_back(KernelFactor{{"Se", "A"}, {"U"}, pu});
    const int se_size = m.Se.size();
    factors.push_back(MapFactor{{"U", "Se"},
                                "X",
                                m.X,
                                [f_u_se, se_size](std::span<const int> in) {
                                    return f_u_se[static_cast<std::size_t>(in[0]) * se_size + in[1]];
                                }});
    factors.push_back(KernelFactor{{"X", "S"}, {"Y"}, m.channel});
    return compose(factors);
}

// Joint over (U, A, S, Se, Sd, X, Y) with A = g(U), X = f(U,Se).
inline JointTable joint_thm3(const ProbingModel& m, const ProbDist& pu, const StrategyPair& strat) {
    if (!m.encoder_only())
        throw std::invalid_argument("joint_thm3: model has decoder actions");
    const Alphabet& U = pu.alphabet;
    if (U.size() > detail::thm3_u_bound(m))
        throw std::invalid_argument("joint_thm3: |U|=" + std::to_string(U.size()) +
                                    " exceeds cardinality bound " +
                                    std::to_string(detail::thm3_u_bound(m)));
    if (strat.u_size != U.size() || strat.se_size != m.Se.size() || strat.ad_size != 1)
        throw std::invalid_argument("joint_thm3: strategy shape mismatch");
    for (int v : strat.g)
        if (v < 0 || v >= m.Ae.size()) throw std::invalid_argument("joint_thm3: g out of range");
    for (int v : strat.f)
        if (v < 0 || v >= m.X.size()) throw std::invalid_argument("joint_thm3: f out of range");

    std::vector<Factor> factors;
    factors.push_back(DistFactor{"U", pu});
    factors.push_back(MapFactor{{"U"}, "A", m.Ae, [&strat](std::span<const int> in) {
                                    return strat.g_at(in[0]);
                                }});
    factors.push_back(DistFactor{"S", m.state});
    factors.push_back(DistFactor{"Ad", ProbDist::point_mass(m.Ad, 0)});
    factors.push_back(KernelFactor{{"S", "A", "Ad"}, {"Se", "Sd"}, m.probe});
    factors.push_back(MapFactor{{"U", "Se"}, "X", m.X, [&strat](std::span<const int> in) {
                                    return strat.f_at(in[0], in[1]);
                                }});
    factors.push_back(KernelFactor{{"X", "S"}, {"Y"}, m.channel});
    return compose(factors);
}

// Joint over (Ad, U, Ae, S, Se, Sd, X, Y) with Ae = g(U,Ad), X = f(U,Se,Ad).
inline JointTable joint_thm4(const ProbingModel& m, const ProbDist& pad, const CondKernel& pu_ad,
                             const StrategyPair& strat) {
    if (!(pad.alphabet == m.Ad))
        throw std::invalid_argument("joint_thm4: decoder action alphabet mismatch");
    if (pu_ad.inputs.size() != 1 || !(pu_ad.inputs[0] == m.Ad) || pu_ad.outputs.size() != 1)
        throw std::invalid_argument("joint_thm4: auxiliary kernel must be P(U|Ad)");
    const Alphabet& U = pu_ad.outputs[0];
    if (U.size() > detail::thm4_u_bound(m))
        throw std::invalid_argument("joint_thm4: |U|=" + std::to_string(U.size()) +
                                    " exceeds cardinality bound " +
                                    std::to_string(detail::thm4_u_bound(m)));
    if (strat.u_size != U.size() || strat.se_size != m.Se.size() || strat.ad_size != m.Ad.size())
        throw std::invalid_argument("joint_thm4: strategy shape mismatch");

    std::vector<Factor> factors;
    factors.push_back(DistFactor{"Ad", pad});
    factors.push_back(KernelFactor{{"Ad"}, {"U"}, pu_ad});
    factors.push_back(MapFactor{{"U", "Ad"}, "Ae", m.Ae, [&strat](std::span<const int> in) {
                                    return strat.g_at(in[0], in[1]);
                                }});
    factors.push_back(DistFactor{"S", m.state});
    factors.push_back(KernelFactor{{"S", "Ae", "Ad"}, {"Se", "Sd"}, m.probe});
    factors.push_back(MapFactor{{"U", "Se", "Ad"}, "X", m.X, [&strat](std::span<const int> in) {
                                    return strat.f_at(in[0], in[1], in[2]);
                                }});
    factors.push_back(KernelFactor{{"X", "S"}, {"Y"}, m.channel});
    return compose(factors);
}

// E[L(Ae,Ad)] under the joint. Accepts joints labelled either "A" (encoder
// action of the single-sided theorems) or "Ae"/"Ad".
inline double expected_cost(const JointTable& j, const CostTable& cost) {
    const std::string ae_role = j.has_axis("Ae") ? "Ae" : "A";
    if (!j.has_axis(ae_role))
        throw std::invalid_argument("expected_cost: joint has no encoder action axis");
    const bool has_ad = j.has_axis("Ad");
    std::vector<std::string> keep{ae_role};
    if (has_ad) keep.push_back("Ad");
    JointTable pa = marginal_onto(j, std::span<const std::string>(keep));

    const int ae_axis = pa.axis_index(ae_role);
    const int ad_axis = has_ad ? pa.axis_index("Ad") : -1;
    if (pa.axes()[static_cast<std::size_t>(ae_axis)].alphabet.size() != cost.ae_size)
        throw std::invalid_argument("expected_cost: cost table / action alphabet mismatch");

    double total = 0.0;
    std::vector<int> idx(pa.axes().size());
    for (std::size_t f = 0; f < pa.size(); ++f) {
        pa.decode(f, idx);
        int ae = idx[static_cast<std::size_t>(ae_axis)];
        int ad = has_ad ? idx[static_cast<std::size_t>(ad_axis)] : 0;
        total += pa.values()[f] * cost.at(ae, ad);
    }
    return total;
}

} // namespace probecap
