#include <doctest.h>

#include "probecap/curve.hpp"
#include "probecap/solver.hpp"
#include "test_util.hpp"

using namespace probecap;

namespace {

// two-sided observe-or-not variant: decoder actions exist but the decoder
// sees the full state either way; only encoder probes cost anything
ProbingModel two_sided_example1() {
    ProbingModel base = build_example1();
    ProbingModel m = base;
    m.name = "ex1-two-sided";
    m.Ad = make_alphabet("Ad", 2);
    std::vector<std::vector<double>> rows;
    const int nse = m.Se.size(), nsd = m.Sd.size();
    for (int s = 0; s < m.S.size(); ++s)
        for (int ae = 0; ae < m.Ae.size(); ++ae)
            for (int ad = 0; ad < 2; ++ad) {
                std::vector<double> row(static_cast<std::size_t>(nse * nsd), 0.0);
                int se = ae == 1 ? s + 1 : 0;
                row[static_cast<std::size_t>(se * nsd + s)] = 1.0;
                rows.push_back(std::move(row));
            }
    m.probe = CondKernel({m.S, m.Ae, m.Ad}, {m.Se, m.Sd}, std::move(rows));
    m.cost = CostTable(2, 2, {0.0, 0.0, 1.0, 1.0}); // decoder probing is free
    validate(m);
    return m;
}

} // namespace

TEST_CASE("causal strategy solver matches the direct objective on full-knowledge models") {
    ProbingModel m = build_example1();
    for (double g : {0.0, 0.25, 0.5, 0.75, 1.0}) {
        SolveResult direct = solve_thm1(m, g);
        SolveResult causal = solve_thm3(m, g);
        CHECK(std::abs(direct.value - causal.value) <= 2e-3);
        CHECK(causal.achieved_cost <= g + 1e-9);
    }
}

TEST_CASE("restricting the strategy support can only lose value") {
    ProbingModel m = build_example1();
    SolveResult full = solve_thm3(m, 0.5);
    SolveOptions one;
    one.u_cap = 1;
    SolveResult single = solve_thm3(m, 0.5, one);
    CHECK(single.value <= full.value + 1e-9);
    CHECK(single.value <= 1e-9); // a single letter carries nothing
}

TEST_CASE("action-blind probe makes the budget irrelevant") {
    // probe reveals the state regardless of the action
    ProbingModel m = build_example1();
    std::vector<std::vector<double>> rows;
    const int nse = m.Se.size(), nsd = m.Sd.size();
    for (int s = 0; s < m.S.size(); ++s)
        for (int ae = 0; ae < m.Ae.size(); ++ae) {
            std::vector<double> row(static_cast<std::size_t>(nse * nsd), 0.0);
            row[static_cast<std::size_t>((s + 1) * nsd + s)] = 1.0;
            rows.push_back(std::move(row));
        }
    m.probe = CondKernel({m.S, m.Ae, m.Ad}, {m.Se, m.Sd}, std::move(rows));
    m.cost = CostTable::encoder_only({0.0, 0.0});
    validate(m);
    SolveResult a = solve_thm3(m, 0.0);
    SolveResult b = solve_thm3(m, 1.0);
    CHECK(a.value == doctest::Approx(b.value).epsilon(1e-9));
}

TEST_CASE("auxiliary construction reproduces the direct objective inside a thm3 joint") {
    // blocks per action, atoms thresholding the optimal rows at budget 0.5:
    // p(*)=0.5, p(se=0)=0.3, p(se=1)=0.7
    ProbingModel m = build_example1();
    ProbDist pu(make_alphabet("U", 4), {0.25, 0.25, 0.15, 0.35});
    StrategyPair strat(4, 3, 1, {0, 0, 1, 1},
                       {0, 0, 0,   // u0: emit 0 when unobserved
                        1, 0, 0,   // u1: emit 1 when unobserved
                        0, 0, 1,   // u2: emit 0 on s=0, 1 on s=1
                        0, 1, 0}); // u3: the complement
    JointTable j = joint_thm3(m, pu, strat);

    std::vector<std::string> u{"U"}, ysd{"Y", "Sd"};
    double aux_rate = conditional_mutual_information(j, u, ysd, {});
    double direct_rate = conditional_mutual_information(j, "X", "Y", {"S"});
    CHECK(aux_rate == doctest::Approx(direct_rate).epsilon(1e-9));
    CHECK(aux_rate == doctest::Approx(0.321928).epsilon(1e-5));
    CHECK(expected_cost(j, m.cost) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("non-causal lower bound meets the direct value on full-knowledge models") {
    ProbingModel m = build_example1();
    SolveOptions opts;
    opts.multistarts = 8; // the exact warm start carries the load here
    for (double g : {0.0, 0.5, 1.0}) {
        SolveResult direct = solve_thm1(m, g);
        SolveResult lower = solve_thm2_lower(m, g, opts);
        CHECK(lower.status == SolveStatus::multistart_best);
        CHECK(lower.lower_bound);
        CHECK(std::abs(direct.value - lower.value) <= 2e-3);
        CHECK(lower.achieved_cost <= g + 1e-9);
    }
}

TEST_CASE("direct thm2 evaluator agrees with the joint-table route") {
    ProbingModel m = build_example2();
    std::mt19937_64 rng(314);
    const int nu = 3;
    for (int rep = 0; rep < 5; ++rep) {
        auto action = testutil::random_simplex(rng, 2);
        std::vector<std::vector<double>> rows_u;
        for (int se = 0; se < m.Se.size(); ++se)
            for (int a = 0; a < m.Ae.size(); ++a) {
                auto r = testutil::random_simplex(rng, nu);
                rows_u.push_back(r);
            }
        std::vector<int> f(static_cast<std::size_t>(nu) * m.Se.size());
        for (auto& v : f) v = static_cast<int>(rng() % 2);

        double fast = thm2_objective(m, action, rows_u, f);

        ProbDist pa(m.Ae, action);
        CondKernel pu({m.Se, m.Ae}, {make_alphabet("U", nu)}, rows_u);
        JointTable j = joint_thm2(m, pa, pu, f);
        std::vector<std::string> u{"U"}, ysd{"Y", "Sd"}, se{"Se"}, a{"A"};
        double slow = conditional_mutual_information(j, u, ysd, {}) -
                      conditional_mutual_information(j, u, se, a);
        CHECK(fast == doctest::Approx(slow).epsilon(1e-9));
    }
}

TEST_CASE("hand-built feasible points never beat the reported lower bound") {
    ProbingModel m = build_example2();
    SolveOptions opts;
    opts.multistarts = 8;
    SolveResult lower = solve_thm2_lower(m, 0.5, opts);

    // U = X with a pinned action: a valid feasible point
    std::vector<double> action{0.5, 0.5};
    std::vector<std::vector<double>> rows_u;
    for (int se = 0; se < m.Se.size(); ++se)
        for (int a = 0; a < m.Ae.size(); ++a) rows_u.push_back({0.5, 0.5, 0.0, 0.0});
    std::vector<int> f(static_cast<std::size_t>(4) * m.Se.size(), 0);
    for (int u = 0; u < 4; ++u)
        for (int se = 0; se < m.Se.size(); ++se)
            f[static_cast<std::size_t>(u) * m.Se.size() + se] = u % 2; // X = U
    double feasible = thm2_objective(m, action, rows_u, f);
    CHECK(feasible <= lower.value + 1e-6);

    // the binary action-revealing scheme (U a copy of A) is feasible too
    std::vector<std::vector<double>> copy_rows;
    for (int se = 0; se < m.Se.size(); ++se)
        for (int a = 0; a < m.Ae.size(); ++a)
            copy_rows.push_back(a == 0 ? std::vector<double>{1.0, 0.0}
                                       : std::vector<double>{0.0, 1.0});
    std::vector<int> f2 = {0, 0, 0, 0, 1, 1}; // probe branch adapts to the observation
    double scheme2 = thm2_objective(m, action, copy_rows, f2);
    CHECK(scheme2 >= 0.0);
    CHECK(scheme2 <= lower.value + 1e-6);

    // it also matches the joint built from the same pieces
    ProbDist pa(m.Ae, action);
    CondKernel pu({m.Se, m.Ae}, {make_alphabet("U", 2)}, copy_rows);
    JointTable j = joint_thm2(m, pa, pu, f2);
    std::vector<std::string> u{"U"}, ysd{"Y", "Sd"}, se{"Se"}, a{"A"};
    double via_joint = conditional_mutual_information(j, u, ysd, {}) -
                       conditional_mutual_information(j, u, se, a);
    CHECK(scheme2 == doctest::Approx(via_joint).epsilon(1e-9));
}

TEST_CASE("non-causal bound grows with the budget on the no-feedback example") {
    ProbingModel m = build_example2();
    SolveOptions opts;
    opts.multistarts = 8;
    SolveResult at0 = solve_thm2_lower(m, 0.0, opts);
    SolveResult at1 = solve_thm2_lower(m, 1.0, opts);
    CHECK(at1.value >= at0.value - 1e-6);
    CHECK(at1.value > 0.0);
}

TEST_CASE("two-sided solver with an inactive decoder") {
    ProbingModel m = build_example2();
    for (double g : {0.0, 0.5, 1.0}) {
        SolveResult three = solve_thm3(m, g);
        SolveResult four = solve_thm4(m, g);
        CHECK(four.value == doctest::Approx(three.value).epsilon(1e-9));
        CHECK(four.status == SolveStatus::converged);
    }
}

TEST_CASE("free decoder probing with full knowledge adds nothing") {
    ProbingModel two = two_sided_example1();
    ProbingModel one = build_example1();
    for (double g : {0.0, 0.5, 1.0}) {
        SolveResult r2 = solve_thm4(two, g);
        SolveResult r1 = solve_thm1(one, g);
        CHECK(std::abs(r2.value - r1.value) <= 2e-3);
        CHECK(r2.status == SolveStatus::multistart_best); // decoder grid in play
    }
}
