#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <map>
#include <random>

#include "edspin/eigensolve.hpp"
#include "edspin/errors.hpp"
#include "edspin/ligandfield.hpp"
#include "edspin/units.hpp"

using namespace edspin;

namespace {

// Lowest term of a given multiplicity, NaN when absent.
double lowest_of(const TSPoint& pt, int mult) {
    for (const auto& t : pt.terms)
        if (t.multiplicity == mult) return t.energy_eb;
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

TEST_CASE("condon-shortley coefficients match the tabulated dd values") {
    // Diagonal entries, exact rationals.
    CHECK(condon_shortley_ck(0, 2, 2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(0, 1, 1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(2, 2, 2) == doctest::Approx(-2.0 / 7.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(2, 1, 1) == doctest::Approx(1.0 / 7.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(2, 0, 0) == doctest::Approx(2.0 / 7.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(4, 2, 2) == doctest::Approx(1.0 / 21.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(4, 1, 1) == doctest::Approx(-4.0 / 21.0).epsilon(1e-12));
    CHECK(condon_shortley_ck(4, 0, 0) == doctest::Approx(6.0 / 21.0).epsilon(1e-12));

    // Squared off-diagonal entries (exchange-integral table).
    auto sq = [](double x) { return x * x; };
    CHECK(sq(condon_shortley_ck(2, 2, 1)) == doctest::Approx(6.0 / 49.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(2, 2, 0)) == doctest::Approx(4.0 / 49.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(2, 1, 0)) == doctest::Approx(1.0 / 49.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(2, 1, -1)) == doctest::Approx(6.0 / 49.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(4, 2, 1)) == doctest::Approx(5.0 / 441.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(4, 2, 0)) == doctest::Approx(15.0 / 441.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(4, 1, 0)) == doctest::Approx(30.0 / 441.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(4, 2, -2)) == doctest::Approx(70.0 / 441.0).epsilon(1e-12));
    CHECK(sq(condon_shortley_ck(4, 2, -1)) == doctest::Approx(35.0 / 441.0).epsilon(1e-12));

    // Transfer selection rule: |m - m'| <= k.
    CHECK(condon_shortley_ck(2, 2, -1) == 0.0);
    CHECK(condon_shortley_ck(2, 2, -2) == 0.0);
    CHECK(condon_shortley_ck(0, 2, 1) == 0.0);
}

TEST_CASE("d2 free-ion term gaps follow the diagonal-sum-rule results") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> b_draw(500.0, 1500.0);
    std::uniform_real_distribution<double> ratio(3.0, 6.0);
    for (int trial = 0; trial < 5; ++trial) {
        const double b = b_draw(rng);
        const double c = ratio(rng) * b;
        const RacahParameters rp{b, c, 0.0};
        const TSPoint pt = ts_solve_point(2, rp, 0.0);

        // d2 at Dq=0: 3F(21), 3P(9), 1G(9), 1D(5), 1S(1); total 25 in sector.
        REQUIRE(pt.terms.size() == 5);
        CHECK(pt.terms[0].multiplicity == 3); // Hund ground term 3F
        CHECK(pt.terms[0].degeneracy == 21);

        double e_3p = NAN, e_1d = NAN, e_1g = NAN, e_1s = NAN;
        for (const auto& t : pt.terms) {
            if (t.multiplicity == 3 && t.degeneracy == 9) e_3p = t.energy_eb;
            if (t.multiplicity == 1 && t.degeneracy == 5) e_1d = t.energy_eb;
            if (t.multiplicity == 1 && t.degeneracy == 9) e_1g = t.energy_eb;
            if (t.multiplicity == 1 && t.degeneracy == 1) e_1s = t.energy_eb;
        }
        const double cb = c / b;
        CHECK(e_1d == doctest::Approx(5.0 + 2.0 * cb).epsilon(1e-9));
        CHECK(e_3p == doctest::Approx(15.0).epsilon(1e-9));
        CHECK(e_1g == doctest::Approx(12.0 + 2.0 * cb).epsilon(1e-9));
        CHECK(e_1s == doctest::Approx(22.0 + 7.0 * cb).epsilon(1e-9));
    }
}

TEST_CASE("B = C = 0 collapses the free-ion spectrum") {
    // E/B normalization is undefined at B = 0, so check the raw spectrum:
    // every d2 state sits at the A-dependent pair shift.
    const RacahParameters rp{0.0, 0.0, 500.0};
    const auto ints = d_coulomb_integrals(rp);
    const auto basis = build_sector_basis({5, 1, 1});
    const auto spec = diagonalize(build_hamiltonian(basis, ints));
    for (std::int64_t i = 0; i < spec.size(); ++i)
        CHECK(spec.values[i] == doctest::Approx(cm1_to_hartree(500.0)).epsilon(1e-12));
}

TEST_CASE("octahedral crystal field integrals") {
    CHECK(Eigen::MatrixXd::Zero(1, 1)(0, 0) == 0.0);
    const auto zero = crystal_field_oh({0.0});
    for (int p = 0; p < d_norb; ++p) CHECK(zero.one(p, p) == 0.0);

    const auto cf = crystal_field_oh({1000.0});
    double trace = 0.0;
    for (int p = 0; p < d_norb; ++p) trace += cf.one(p, p);
    CHECK(trace == doctest::Approx(0.0).scale(1.0).epsilon(1e-15));
    CHECK(hartree_to_cm1(cf.one(0, 0) - cf.one(2, 2)) == doctest::Approx(10000.0).epsilon(1e-12));
}

TEST_CASE("d1 gives two curves split by 10Dq and no crossings") {
    const RacahParameters rp = RacahParameters::fe2_defaults();
    TSOptions opts;
    opts.x_min = 0.1;
    opts.x_max = 3.0;
    opts.points = 12;
    const auto curve = tanabe_sugano(1, rp, opts);
    CHECK(curve.crossings.empty());
    for (const auto& pt : curve.sweep) {
        REQUIRE(pt.terms.size() == 2);
        CHECK(pt.terms[0].multiplicity == 2);
        CHECK(pt.terms[1].multiplicity == 2);
        CHECK(pt.terms[0].energy_eb == 0.0);
        CHECK(pt.terms[1].energy_eb == doctest::Approx(10.0 * pt.dq_over_b).epsilon(1e-9));
        CHECK(pt.terms[0].degeneracy == 6);  // t2g x 2 spin
        CHECK(pt.terms[1].degeneracy == 4);  // eg x 2 spin
    }
    CHECK(find_crossings(curve, CrossingQuery::excited, 2, 4).empty());
}

TEST_CASE("free-ion degeneracy counts match the multiplet counting formula") {
    // Number of spin-S multiplets for n electrons in norb orbitals:
    // (2S+1)/(norb+1) * C(norb+1, n/2-S) * C(norb+1, n/2+S+1).
    auto weyl = [](int norb, int n, double s) {
        const double x = n / 2.0;
        const int lo = static_cast<int>(std::lround(x - s));
        const int hi = static_cast<int>(std::lround(x + s + 1.0));
        return (2.0 * s + 1.0) / (norb + 1) * static_cast<double>(binomial(norb + 1, lo)) *
               static_cast<double>(binomial(norb + 1, hi));
    };

    for (int n : {2, 3, 6}) {
        const TSPoint pt = ts_solve_point(n, RacahParameters::fe2_defaults(), 0.0);
        std::map<int, int> count_by_mult;
        std::size_t total = 0;
        for (const auto& t : pt.terms) {
            CHECK(t.degeneracy == t.sector_count * t.multiplicity);
            count_by_mult[t.multiplicity] += t.sector_count;
            total += static_cast<std::size_t>(t.sector_count);
        }
        for (const auto& [mult, count] : count_by_mult) {
            const double s = (mult - 1) / 2.0;
            CHECK(count == doctest::Approx(weyl(5, n, s)));
        }
        const SectorSpec spec{5, n - n / 2, n / 2};
        CHECK(total == spec.dimension());
    }
}

TEST_CASE("term energies scale linearly with (B, C) at Dq = 0") {
    const RacahParameters rp{800.0, 3200.0, 0.0};
    const RacahParameters rp2{1600.0, 6400.0, 0.0};
    const TSPoint p1 = ts_solve_point(6, rp, 0.0);
    const TSPoint p2 = ts_solve_point(6, rp2, 0.0);
    REQUIRE(p1.terms.size() == p2.terms.size());
    // E/B is invariant when both B and C double.
    for (std::size_t i = 0; i < p1.terms.size(); ++i)
        CHECK(p1.terms[i].energy_eb == doctest::Approx(p2.terms[i].energy_eb).epsilon(1e-10));

    // In absolute units the doubling scales every relative energy by 2.
    const double scale = 2.0;
    for (std::size_t i = 0; i < p1.terms.size(); ++i)
        CHECK(p2.terms[i].energy_eb * rp2.b_cm1 ==
              doctest::Approx(scale * p1.terms[i].energy_eb * rp.b_cm1).epsilon(1e-10));
}

TEST_CASE("d6 diagram: quintet ground at Dq=0, crossover, excited crossing") {
    const RacahParameters rp = RacahParameters::fe2_defaults();
    TSOptions opts;
    opts.x_min = 0.0;
    opts.x_max = 4.0;
    opts.points = 40;
    const auto curve = tanabe_sugano(6, rp, opts);

    // (a) Hund ground term 5D at zero field, degeneracy 25.
    const auto& first = curve.sweep.front();
    CHECK(first.terms[0].multiplicity == 5);
    CHECK(first.terms[0].degeneracy == 25);

    // Ground line is identically zero, all other curves non-negative.
    for (const auto& pt : curve.sweep) {
        CHECK(pt.terms[0].energy_eb == 0.0);
        for (const auto& t : pt.terms) CHECK(t.energy_eb >= 0.0);
    }

    // (b) exactly one ground-state crossover, quintet -> singlet.
    REQUIRE(curve.crossings.size() == 1);
    CHECK(curve.crossings[0].mult_low == 5);
    CHECK(curve.crossings[0].mult_high == 1);
    CHECK(curve.crossings[0].dq_over_b > 0.0);
    CHECK(curve.sweep.back().terms[0].multiplicity == 1);

    // (c) an excited triplet-quintet crossing beyond the crossover.
    const auto excited = find_crossings(curve, CrossingQuery::excited, 3, 5);
    REQUIRE(!excited.empty());
    CHECK(excited[0].dq_over_b > curve.crossings[0].dq_over_b);

    // Past the excited crossing the triplet sits below the quintet.
    const TSPoint far = ts_solve_point(6, rp, opts.x_max);
    CHECK(lowest_of(far, 3) < lowest_of(far, 5));
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(ts_solve_point(0, RacahParameters::fe2_defaults(), 0.0), ParameterError);
    CHECK_THROWS_AS(ts_solve_point(10, RacahParameters::fe2_defaults(), 0.0), ParameterError);
    CHECK_THROWS_AS(d_coulomb_integrals(RacahParameters{-1.0, 100.0, 0.0}), ParameterError);
    TSOptions bad;
    bad.x_min = 1.0;
    bad.x_max = 1.0;
    CHECK_THROWS_AS(tanabe_sugano(6, RacahParameters::fe2_defaults(), bad), ParameterError);
}
