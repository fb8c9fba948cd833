#include <doctest.h>

#include <cstdlib>

#include "probecap/curve.hpp"
#include "probecap/solver.hpp"
#include "test_util.hpp"

using namespace probecap;

namespace {
const double kC0 = 0.311278;  // h2(0.25) - 0.5
const double kC1 = 0.321928;  // h2(0.2) - 0.4
}

TEST_CASE("thm1 endpoints on the two-state mixture example") {
    ProbingModel m = build_example1();

    SolveResult r0 = solve_thm1(m, 0.0);
    CHECK(r0.value == doctest::Approx(kC0).epsilon(1e-3));
    CHECK(r0.achieved_cost <= 1e-9);

    SolveResult r1 = solve_thm1(m, 1.0);
    CHECK(r1.value == doctest::Approx(kC1).epsilon(1e-3));
    CHECK(r1.achieved_cost == doctest::Approx(1.0));

    auto marg = thm1_state_input_marginals(m, r1);
    CHECK(marg[0][0] == doctest::Approx(0.4).epsilon(1e-2));
    CHECK(marg[1][0] == doctest::Approx(0.6).epsilon(1e-2));

    // ascent trace never decreases
    for (std::size_t i = 0; i + 1 < r1.trace.size(); ++i)
        CHECK(r1.trace[i + 1] >= r1.trace[i] - 1e-12);
}

TEST_CASE("thm1 on the power-constrained multiplier example") {
    ProbingModel m = build_example3();
    SolveResult r = solve_thm1(m, 0.25);
    CHECK(r.value == doctest::Approx(0.477217).epsilon(1e-3));

    SolveResult rhigh = solve_thm1(m, 0.75);
    CHECK(rhigh.value == doctest::Approx(0.5).epsilon(1e-3));

    CHECK_THROWS_AS(solve_thm1(m, -0.2), std::invalid_argument);
}

TEST_CASE("grid oracle agrees with the ascent solver") {
    ProbingModel m = build_example1();
    SolveResult fast = solve_thm1(m, 0.5);
    SolveResult slow = grid_oracle_thm1(m, 0.5, 0.005);
    CHECK(slow.status == SolveStatus::oracle);
    CHECK(std::abs(fast.value - slow.value) <= 2e-3);
    CHECK(fast.value >= slow.value - 1e-9); // grid can only undershoot

    // zero budget pins the action to never-probe
    SolveResult z_fast = solve_thm1(m, 0.0);
    SolveResult z_slow = grid_oracle_thm1(m, 0.0, 0.005);
    CHECK(std::abs(z_fast.value - z_slow.value) <= 2e-3);
}

TEST_CASE("grid oracle on random instances") {
    for (std::uint64_t seed : {11ull, 22ull, 33ull}) {
        double gamma = 0.0;
        ProbingModel m = testutil::random_binary_model(seed, &gamma);
        SolveResult fast = solve_thm1(m, gamma);
        SolveResult slow = grid_oracle_thm1(m, gamma, 0.01);
        CHECK(std::abs(fast.value - slow.value) <= 5e-3);
    }
}

TEST_CASE("grid oracle degenerate and guard cases") {
    // channel ignores the input: nothing to transmit
    Alphabet X = make_alphabet("X", 2), Y = make_alphabet("Y", 2), S = make_alphabet("S", 2);
    CondKernel useless({X, S}, {Y}, {{0.7, 0.3}, {0.2, 0.8}, {0.7, 0.3}, {0.2, 0.8}});
    ProbingModel m = build_observe_or_not(useless, ProbDist(S, {0.5, 0.5}), true, 1.0);
    for (double g : {0.0, 0.5, 1.0}) {
        CHECK(grid_oracle_thm1(m, g, 0.02).value <= 1e-9);
        CHECK(solve_thm1(m, g).value <= 1e-6);
    }

    // parameter cap refuses large grids
    Alphabet X4 = make_alphabet("X", 4);
    std::vector<std::vector<double>> rows(8, {0.5, 0.5});
    CondKernel big({X4, S}, {Y}, rows);
    ProbingModel mbig = build_observe_or_not(big, ProbDist(S, {0.5, 0.5}), true, 1.0);
    CHECK_THROWS_AS(grid_oracle_thm1(mbig, 0.5, 0.01), std::invalid_argument);
}

TEST_CASE("value never drops with a larger budget") {
    for (std::uint64_t seed : {3ull, 8ull}) {
        ProbingModel m = testutil::random_binary_model(seed);
        double prev = -1.0;
        for (double g : {0.0, 0.3, 0.6, 1.0}) {
            double v = solve_thm1(m, g).value;
            CHECK(v >= prev - 2e-3);
            prev = v;
        }
    }
}

TEST_CASE("solver dominates random feasible points") {
    std::mt19937_64 rng(2024);
    ProbingModel m = testutil::random_binary_model(77);
    const double gamma = 0.6;
    SolveResult best = solve_thm1(m, gamma);
    detail::Thm1FullEval fe(m);
    const int nrows = fe.row_count();
    for (int rep = 0; rep < 100; ++rep) {
        double pa1 = testutil::urand(rng) * gamma; // respects the cost cap
        std::vector<double> action{1.0 - pa1, pa1};
        std::vector<double> rows;
        for (int k = 0; k < nrows; ++k) {
            auto r = testutil::random_simplex(rng, 2);
            rows.insert(rows.end(), r.begin(), r.end());
        }
        double value = fe.eval(action, rows, nullptr, nullptr);
        CHECK(value <= best.value + 1e-3);
    }
}

TEST_CASE("constrained blahut-arimoto") {
    // noiseless binary channel, free inputs
    BaChannel noiseless{2, 2, {1.0, 0.0, 0.0, 1.0}};
    SolveResult r = blahut_arimoto_constrained(noiseless, {0.0, 0.0}, 1.0);
    CHECK(r.value == doctest::Approx(1.0).epsilon(1e-9));

    // symmetric crossover 0.3
    BaChannel bsc{2, 2, {0.7, 0.3, 0.3, 0.7}};
    SolveResult rb = blahut_arimoto_constrained(bsc, {0.0, 0.0}, 1.0);
    CHECK(rb.value == doctest::Approx(1.0 - binary_entropy(0.3)).epsilon(1e-6));

    // only the free input is usable at zero budget
    SolveResult rz = blahut_arimoto_constrained(noiseless, {0.0, 1.0}, 0.0);
    CHECK(rz.value <= 1e-6);
    CHECK(rz.achieved_cost <= 1e-8);

    // interior budget: cost constraint met, trace monotone
    SolveResult rc = blahut_arimoto_constrained(noiseless, {0.0, 1.0}, 0.3);
    CHECK(rc.achieved_cost <= 0.3 + 1e-9);
    CHECK(rc.value == doctest::Approx(binary_entropy(0.3)).epsilon(1e-6));
    for (std::size_t i = 0; i + 1 < rc.trace.size(); ++i)
        CHECK(rc.trace[i + 1] >= rc.trace[i] - 1e-9);
    // input distribution is a distribution
    double sum = 0.0;
    for (double p : rc.action) {
        CHECK(p >= -1e-12);
        sum += p;
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    CHECK_THROWS_AS(blahut_arimoto_constrained(noiseless, {0.5, 1.0}, 0.1), std::invalid_argument);
}

TEST_CASE("sweep flags and baseline dominance") {
    ProbingModel m = build_example1();
    auto solver = [](const ProbingModel& mm, double g) { return solve_thm1(mm, g); };
    SweepCurve c = sweep(solver, m, uniform_grid(0.0, 1.0, 11));
    CHECK(c.all_solved());
    CHECK(c.monotone);
    CHECK(c.concave);

    SweepCurve base = time_sharing_baseline(c.values.front(), c.values.back(), c.gammas);
    CHECK(base.values.front() == doctest::Approx(c.values.front()));
    CHECK(base.values.back() == doctest::Approx(c.values.back()));
    CHECK(base.values[5] == doctest::Approx(0.316603).epsilon(1e-3));
    double max_gap = 0.0;
    for (std::size_t i = 0; i < c.values.size(); ++i) {
        CHECK(c.values[i] >= base.values[i] - 1e-6);
        max_gap = std::max(max_gap, c.values[i] - base.values[i]);
    }
    CHECK(max_gap > 1e-3); // mixing endpoints is strictly worse somewhere

    CHECK_THROWS_AS(sweep(solver, m, std::vector<double>{0.5, 0.5}), std::invalid_argument);
}

TEST_CASE("sweep of a flat model and error poisoning") {
    Alphabet X = make_alphabet("X", 2), Y = make_alphabet("Y", 2), S = make_alphabet("S", 2);
    CondKernel clean({X, S}, {Y}, {{1.0, 0.0}, {1.0, 0.0}, {0.0, 1.0}, {0.0, 1.0}});
    ProbingModel m = build_observe_or_not(clean, ProbDist(S, {0.5, 0.5}), true, 1.0, "flat");
    auto solver = [](const ProbingModel& mm, double g) { return solve_thm1(mm, g); };
    SweepCurve c = sweep(solver, m, uniform_grid(0.0, 1.0, 5));
    for (double v : c.values) CHECK(v == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(c.monotone);
    CHECK(c.concave);

    // one failing point poisons the flags but not the rest of the sweep
    SweepCurve bad = sweep_fn(uniform_grid(0.0, 1.0, 5), [](double g) -> SolveResult {
        if (g > 0.4 && g < 0.6) throw std::runtime_error("synthetic failure");
        SolveResult r;
        r.value = g;
        return r;
    });
    CHECK_FALSE(bad.all_solved());
    CHECK_FALSE(bad.monotone);
    CHECK(bad.errors[2].find("synthetic") != std::string::npos);
    CHECK(bad.values[4] == doctest::Approx(1.0));
}

TEST_CASE("cutoff point") {
    ProbingModel m1 = build_example1();
    auto s1 = [&](double g) { return solve_thm1(m1, g).value; };
    SweepCurve c1 = sweep([](const ProbingModel& mm, double g) { return solve_thm1(mm, g); }, m1,
                          uniform_grid(0.0, 1.0, 21));
    double cut1 = cutoff_point(c1, 2e-5, s1);
    CHECK(std::abs(cut1 - 0.20) <= 0.02);

    ProbingModel m3 = build_example3();
    auto s3 = [&](double g) { return solve_thm1(m3, g).value; };
    SweepCurve c3 = sweep([](const ProbingModel& mm, double g) { return solve_thm1(mm, g); }, m3,
                          uniform_grid(0.0, 1.0, 21));
    double cut3 = cutoff_point(c3, 2e-5, s3);
    CHECK(std::abs(cut3 - 0.50) <= 0.02);

    // flat curve: leftmost grid point, no refinement needed
    SweepCurve flat = time_sharing_baseline(0.7, 0.7, uniform_grid(0.0, 1.0, 5));
    CHECK(cutoff_point(flat, 1e-3) == doctest::Approx(0.0));

    // non-monotone curves are rejected
    SweepCurve vshape = time_sharing_baseline(0.0, 0.0, uniform_grid(0.0, 1.0, 5));
    vshape.values = {0.5, 0.2, 0.1, 0.2, 0.5};
    CHECK_THROWS_AS(cutoff_point(vshape, 1e-3), std::runtime_error);
}

TEST_CASE("upper concave envelope") {
    // already concave: identity
    SweepCurve conc = time_sharing_baseline(0.2, 0.8, uniform_grid(0.0, 1.0, 9));
    SweepCurve e1 = upper_concave_envelope(conc);
    for (std::size_t i = 0; i < conc.values.size(); ++i)
        CHECK(e1.values[i] == doctest::Approx(conc.values[i]).epsilon(1e-12));
    CHECK(e1.concave);

    // two points: the straight line
    SweepCurve two = time_sharing_baseline(0.1, 0.9, {0.0, 1.0});
    SweepCurve e2 = upper_concave_envelope(two);
    CHECK(e2.values[0] == doctest::Approx(0.1));
    CHECK(e2.values[1] == doctest::Approx(0.9));

    // random zig-zag against the brute-force chord maximum
    SweepCurve v = time_sharing_baseline(0.0, 0.0, uniform_grid(0.0, 1.0, 9));
    std::mt19937_64 rng(8);
    for (auto& val : v.values) val = testutil::urand(rng);
    SweepCurve ev = upper_concave_envelope(v);
    for (std::size_t i = 0; i < v.values.size(); ++i) {
        double brute = v.values[i];
        for (std::size_t a = 0; a <= i; ++a)
            for (std::size_t b = i; b < v.values.size(); ++b) {
                if (a == b) continue;
                double t = (v.gammas[i] - v.gammas[a]) / (v.gammas[b] - v.gammas[a]);
                brute = std::max(brute, (1.0 - t) * v.values[a] + t * v.values[b]);
            }
        CHECK(ev.values[i] == doctest::Approx(brute).epsilon(1e-9));
    }
    CHECK(ev.concave);
}

TEST_CASE("sweeps are deterministic across worker counts") {
    ProbingModel m = build_example1();
    auto solver = [](const ProbingModel& mm, double g) {
        SolveOptions o;
        o.seed = 99;
        return solve_thm1(mm, g, o);
    };
    setenv("PROBECAP_THREADS", "1", 1);
    SweepCurve c1 = sweep(solver, m, uniform_grid(0.0, 1.0, 7));
    setenv("PROBECAP_THREADS", "4", 1);
    SweepCurve c4 = sweep(solver, m, uniform_grid(0.0, 1.0, 7));
    unsetenv("PROBECAP_THREADS");
    for (std::size_t i = 0; i < c1.values.size(); ++i) {
        CHECK(c1.values[i] == c4.values[i]); // bit identical
        CHECK(c1.points[i].achieved_cost == c4.points[i].achieved_cost);
    }
}

TEST_CASE("curve csv format") {
    SweepCurve c = time_sharing_baseline(0.25, 0.75, uniform_grid(0.0, 1.0, 3));
    std::string csv = curve_csv(c);
    CHECK(csv.find("gamma,value_bits,achieved_cost,status") == 0);
    CHECK(csv.find("0.5,0.5,0.5,converged") != std::string::npos);
}
