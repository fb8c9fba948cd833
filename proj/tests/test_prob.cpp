#include <doctest.h>

#include "probecap/prob.hpp"
#include "test_util.hpp"

using namespace probecap;

namespace {

// naive summation path: I(X;Y|Z) = sum_z P(z) [H(X|z) + H(Y|z) - H(X,Y|z)]
double naive_cmi(const JointTable& j, const std::string& xr, const std::string& yr,
                 const std::string& zr) {
    int xi = j.axis_index(xr), yi = j.axis_index(yr), zi = j.axis_index(zr);
    int nx = j.axes()[xi].alphabet.size(), ny = j.axes()[yi].alphabet.size(),
        nz = j.axes()[zi].alphabet.size();
    std::vector<int> idx(j.axes().size());
    double total = 0.0;
    for (int z = 0; z < nz; ++z) {
        double pz = 0.0;
        std::vector<double> pxy(static_cast<std::size_t>(nx * ny), 0.0);
        for (std::size_t f = 0; f < j.size(); ++f) {
            j.decode(f, idx);
            if (idx[zi] != z) continue;
            pz += j.values()[f];
            pxy[static_cast<std::size_t>(idx[xi] * ny + idx[yi])] += j.values()[f];
        }
        if (pz <= 0.0) continue;
        std::vector<double> px(static_cast<std::size_t>(nx), 0.0), py(static_cast<std::size_t>(ny), 0.0);
        for (int x = 0; x < nx; ++x)
            for (int y = 0; y < ny; ++y) {
                px[x] += pxy[static_cast<std::size_t>(x * ny + y)] / pz;
                py[y] += pxy[static_cast<std::size_t>(x * ny + y)] / pz;
            }
        double hx = 0.0, hy = 0.0, hxy = 0.0;
        for (double p : px) hx -= plog2p(p);
        for (double p : py) hy -= plog2p(p);
        for (double p : pxy) hxy -= plog2p(p / pz);
        total += pz * (hx + hy - hxy);
    }
    return total;
}

} // namespace

TEST_CASE("binary entropy") {
    CHECK(binary_entropy(0.5) == doctest::Approx(1.0));
    CHECK(binary_entropy(0.0) == doctest::Approx(0.0));
    CHECK(binary_entropy(1.0) == doctest::Approx(0.0));
    CHECK(binary_entropy(0.2) == doctest::Approx(0.721928).epsilon(1e-6));
    CHECK_THROWS_AS(binary_entropy(-0.1), std::domain_error);
    CHECK_THROWS_AS(binary_entropy(1.1), std::domain_error);
}

TEST_CASE("entropy of distributions") {
    Alphabet a4 = make_alphabet("A", 4);
    CHECK(entropy(ProbDist::uniform(a4)) == doctest::Approx(2.0));
    CHECK(entropy(ProbDist::point_mass(a4, 2)) == doctest::Approx(0.0));
    Alphabet a2 = make_alphabet("B", 2);
    CHECK(entropy(ProbDist(a2, {0.25, 0.75})) == doctest::Approx(0.811278).epsilon(1e-6));
}

TEST_CASE("distribution validation") {
    Alphabet a2 = make_alphabet("A", 2);
    CHECK_THROWS_AS(ProbDist(a2, {0.5, 0.6}), std::invalid_argument);
    CHECK_THROWS_AS(ProbDist(a2, {1.5, -0.5}), std::invalid_argument);
    CHECK_THROWS_AS(Alphabet("dup", {"x", "x"}), std::invalid_argument);
}

TEST_CASE("conditional mutual information basics") {
    std::mt19937_64 rng(7);

    // independent axes given a constant conditioner
    auto jx = testutil::random_joint(rng, {{"X", 2}, {"Z", 1}});
    auto jy = testutil::random_joint(rng, {{"Y", 3}, {"W", 1}});
    // build product P(x)P(y) with constant z
    std::vector<Factor> factors;
    factors.push_back(DistFactor{"X", ProbDist(make_alphabet("X", 2), {0.3, 0.7})});
    factors.push_back(DistFactor{"Y", ProbDist(make_alphabet("Y", 3), {0.2, 0.5, 0.3})});
    factors.push_back(DistFactor{"Z", ProbDist(make_alphabet("Z", 1), {1.0})});
    JointTable prod = compose(factors);
    CHECK(conditional_mutual_information(prod, "X", "Y", {"Z"}) == doctest::Approx(0.0).epsilon(1e-12));

    // perfect correlation: X = Y uniform binary, Z constant
    std::vector<Factor> copy_factors;
    copy_factors.push_back(DistFactor{"X", ProbDist::uniform(make_alphabet("X", 2))});
    copy_factors.push_back(MapFactor{{"X"}, "Y", make_alphabet("Y", 2),
                                     [](std::span<const int> in) { return in[0]; }});
    copy_factors.push_back(DistFactor{"Z", ProbDist(make_alphabet("Z", 1), {1.0})});
    JointTable copy = compose(copy_factors);
    CHECK(conditional_mutual_information(copy, "X", "Y", {"Z"}) == doctest::Approx(1.0));

    CHECK_THROWS_AS(conditional_mutual_information(copy, "X", "Q", {}), std::invalid_argument);
}

TEST_CASE("cmi matches the naive summation oracle on random joints") {
    std::mt19937_64 rng(1234);
    for (int rep = 0; rep < 20; ++rep) {
        auto j = testutil::random_joint(rng, {{"X", 2}, {"Y", 2}, {"Z", 2}});
        double fast = conditional_mutual_information(j, "X", "Y", {"Z"});
        double slow = naive_cmi(j, "X", "Y", "Z");
        CHECK(fast == doctest::Approx(slow).epsilon(1e-12));
        CHECK(fast >= 0.0);
    }
}

TEST_CASE("cmi stays within its entropy bounds") {
    std::mt19937_64 rng(99);
    for (int rep = 0; rep < 10; ++rep) {
        auto j = testutil::random_joint(rng, {{"X", 3}, {"Y", 2}, {"Z", 2}});
        double info = conditional_mutual_information(j, "X", "Y", {"Z"});
        // H(X|Z) and H(Y|Z) from marginals
        auto xz = marginal_onto(j, {"X", "Z"});
        auto yz = marginal_onto(j, {"Y", "Z"});
        auto z = marginal_onto(j, {"Z"});
        double hxz = joint_entropy(xz) - joint_entropy(z);
        double hyz = joint_entropy(yz) - joint_entropy(z);
        CHECK(info >= 0.0);
        CHECK(info <= std::min(hxz, hyz) + 1e-9);
    }
}

TEST_CASE("chain rule on random joints") {
    std::mt19937_64 rng(55);
    for (int rep = 0; rep < 10; ++rep) {
        auto j = testutil::random_joint(rng, {{"X", 2}, {"A", 2}, {"Y", 2}, {"S", 2}});
        std::vector<std::string> xa{"X", "A"}, y{"Y"}, s{"S"}, a{"A"}, x{"X"}, as{"A", "S"};
        double lhs = conditional_mutual_information(j, xa, y, s);
        double rhs = conditional_mutual_information(j, a, y, s) +
                     conditional_mutual_information(j, x, y, as);
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-9));
    }
}

TEST_CASE("marginalize") {
    std::mt19937_64 rng(3);
    auto j = testutil::random_joint(rng, {{"X", 2}, {"Y", 3}});

    // dropping nothing returns the same table
    JointTable same = marginalize(j, std::initializer_list<std::string>{});
    REQUIRE(same.size() == j.size());
    for (std::size_t f = 0; f < j.size(); ++f)
        CHECK(same.values()[f] == doctest::Approx(j.values()[f]));

    // product factorization marginalizes to its factor
    std::vector<Factor> factors;
    factors.push_back(DistFactor{"X", ProbDist(make_alphabet("X", 2), {0.4, 0.6})});
    factors.push_back(DistFactor{"Y", ProbDist(make_alphabet("Y", 2), {0.9, 0.1})});
    JointTable prod = compose(factors);
    JointTable px = marginalize(prod, {"Y"});
    CHECK(px.values()[0] == doctest::Approx(0.4));
    CHECK(px.values()[1] == doctest::Approx(0.6));

    CHECK_THROWS_AS(marginalize(px, {"X"}), std::invalid_argument);
    CHECK_THROWS_AS(marginalize(prod, {"nope"}), std::invalid_argument);
}

TEST_CASE("compose basics") {
    // a single distribution factor is that distribution
    std::vector<Factor> one;
    one.push_back(DistFactor{"X", ProbDist(make_alphabet("X", 3), {0.2, 0.3, 0.5})});
    JointTable t = compose(one);
    CHECK(t.values()[2] == doctest::Approx(0.5));

    // deterministic kernel rows from an indicator map
    std::vector<Factor> det;
    det.push_back(DistFactor{"S", ProbDist(make_alphabet("S", 2), {0.25, 0.75})});
    det.push_back(MapFactor{{"S"}, "Se", make_alphabet("Se", 3),
                            [](std::span<const int> in) { return in[0] + 1; }});
    JointTable dt = compose(det);
    // row-by-row: mass concentrated on (s, s+1)
    CHECK(dt.at(std::array<int, 2>{0, 1}) == doctest::Approx(0.25));
    CHECK(dt.at(std::array<int, 2>{1, 2}) == doctest::Approx(0.75));
    CHECK(dt.at(std::array<int, 2>{0, 0}) == doctest::Approx(0.0));

    // dangling conditioning axis is rejected
    std::vector<Factor> bad;
    bad.push_back(MapFactor{{"missing"}, "Z", make_alphabet("Z", 2),
                            [](std::span<const int>) { return 0; }});
    CHECK_THROWS_AS(compose(bad), std::invalid_argument);
}

TEST_CASE("compose five-factor chain matches brute-force products") {
    // binary everything; all factor values multiplied by hand over all tuples
    std::mt19937_64 rng(42);
    ProbDist pa(make_alphabet("A", 2), {0.3, 0.7});
    ProbDist ps(make_alphabet("S", 2), {0.6, 0.4});
    auto row = [&](double p) { return std::vector<double>{p, 1.0 - p}; };
    CondKernel se_kernel({pa.alphabet, ps.alphabet}, {make_alphabet("Se", 2)},
                         {row(0.9), row(0.2), row(0.5), row(0.7)});
    CondKernel x_kernel({make_alphabet("Se", 2), pa.alphabet}, {make_alphabet("X", 2)},
                        {row(0.1), row(0.8), row(0.4), row(0.6)});
    CondKernel y_kernel({make_alphabet("X", 2), ps.alphabet}, {make_alphabet("Y", 2)},
                        {row(0.25), row(0.5), row(0.75), row(0.35)});

    std::vector<Factor> factors;
    factors.push_back(DistFactor{"A", pa});
    factors.push_back(DistFactor{"S", ps});
    factors.push_back(KernelFactor{{"A", "S"}, {"Se"}, se_kernel});
    factors.push_back(KernelFactor{{"Se", "A"}, {"X"}, x_kernel});
    factors.push_back(KernelFactor{{"X", "S"}, {"Y"}, y_kernel});
    JointTable j = compose(factors);

    CHECK(j.total_mass() == doctest::Approx(1.0).epsilon(1e-12));
    for (int a = 0; a < 2; ++a)
        for (int s = 0; s < 2; ++s)
            for (int se = 0; se < 2; ++se)
                for (int x = 0; x < 2; ++x)
                    for (int y = 0; y < 2; ++y) {
                        const int ia[2] = {a, s};
                        const int ose[1] = {se};
                        const int ix[2] = {se, a};
                        const int ox[1] = {x};
                        const int iy[2] = {x, s};
                        const int oy[1] = {y};
                        double expect = pa.mass[a] * ps.mass[s] * se_kernel.prob(ia, ose) *
                                        x_kernel.prob(ix, ox) * y_kernel.prob(iy, oy);
                        CHECK(j.at(std::array<int, 5>{a, s, se, x, y}) ==
                              doctest::Approx(expect).epsilon(1e-12));
                    }
}
