#include "edspin/ligandfield.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <sstream>

#include "edspin/eigensolve.hpp"
#include "edspin/errors.hpp"
#include "edspin/units.hpp"

namespace edspin {

namespace {

double factorial(int n) {
    static const double table[] = {1.,
                                   1.,
                                   2.,
                                   6.,
                                   24.,
                                   120.,
                                   720.,
                                   5040.,
                                   40320.,
                                   362880.,
                                   3628800.,
                                   39916800.,
                                   479001600.,
                                   6227020800.,
                                   87178291200.,
                                   1307674368000.};
    return table[n];
}

} // namespace

double wigner3j(int j1, int j2, int j3, int m1, int m2, int m3) {
    if (m1 + m2 + m3 != 0) return 0.0;
    if (j3 < std::abs(j1 - j2) || j3 > j1 + j2) return 0.0;
    if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(m3) > j3) return 0.0;

    const double delta = std::sqrt(factorial(j1 + j2 - j3) * factorial(j1 - j2 + j3) *
                                   factorial(-j1 + j2 + j3) / factorial(j1 + j2 + j3 + 1));
    const double norm = std::sqrt(factorial(j1 + m1) * factorial(j1 - m1) * factorial(j2 + m2) *
                                  factorial(j2 - m2) * factorial(j3 + m3) * factorial(j3 - m3));

    const int t_min = std::max({0, j2 - j3 - m1, j1 - j3 + m2});
    const int t_max = std::min({j1 + j2 - j3, j1 - m1, j2 + m2});
    double sum = 0.0;
    for (int t = t_min; t <= t_max; ++t) {
        const double den = factorial(t) * factorial(j3 - j2 + t + m1) * factorial(j3 - j1 + t - m2) *
                           factorial(j1 + j2 - j3 - t) * factorial(j1 - t - m1) *
                           factorial(j2 - t + m2);
        sum += ((t % 2) ? -1.0 : 1.0) / den;
    }
    const double sign = ((j1 - j2 - m3) % 2) ? -1.0 : 1.0;
    return sign * delta * norm * sum;
}

double condon_shortley_ck(int k, int m, int mprime) {
    const double sign = (m % 2) ? -1.0 : 1.0;
    return sign * 5.0 * wigner3j(2, k, 2, 0, 0, 0) * wigner3j(2, k, 2, -m, m - mprime, mprime);
}

SlaterRadial slater_from_racah(const RacahParameters& rp) {
    return SlaterRadial{rp.a_cm1 + 7.0 * rp.c_cm1 / 5.0, 49.0 * rp.b_cm1 + 7.0 * rp.c_cm1,
                        63.0 * rp.c_cm1 / 5.0};
}

namespace {

// Chemists' (m1 m2 | m3 m4) over complex d orbitals; real-valued.
double complex_basis_coulomb(int m1, int m2, int m3, int m4, const SlaterRadial& f) {
    if (m1 + m3 != m2 + m4) return 0.0;
    const double fk[3] = {f.f0, f.f2, f.f4};
    double v = 0.0;
    for (int ki = 0; ki < 3; ++ki) {
        const int k = 2 * ki;
        v += fk[ki] * condon_shortley_ck(k, m1, m2) * condon_shortley_ck(k, m3, m4);
    }
    const double sign = ((m2 - m1) % 2) ? -1.0 : 1.0;
    return sign * v;
}

// Real cubic harmonics in the complex |m> basis (columns m = -2..2).
Eigen::Matrix<std::complex<double>, 5, 5> real_d_transform() {
    using cd = std::complex<double>;
    const double r = 1.0 / std::sqrt(2.0);
    const cd i{0.0, 1.0};
    Eigen::Matrix<cd, 5, 5> u = Eigen::Matrix<cd, 5, 5>::Zero();
    auto col = [](int m) { return m + 2; };
    // dz2
    u(0, col(0)) = 1.0;
    // dx2-y2 = (|−2> + |2>)/sqrt(2)
    u(1, col(-2)) = r;
    u(1, col(2)) = r;
    // dxy = i(|−2> − |2>)/sqrt(2)
    u(2, col(-2)) = i * r;
    u(2, col(2)) = -i * r;
    // dxz = (|−1> − |1>)/sqrt(2)
    u(3, col(-1)) = r;
    u(3, col(1)) = -r;
    // dyz = i(|−1> + |1>)/sqrt(2)
    u(4, col(-1)) = i * r;
    u(4, col(1)) = i * r;
    return u;
}

} // namespace

IntegralSet d_coulomb_integrals(const RacahParameters& rp) {
    if (rp.b_cm1 < 0.0 || rp.c_cm1 < 0.0)
        throw ParameterError("d_coulomb_integrals: B and C must be non-negative");
    const SlaterRadial f = slater_from_racah(rp);

    // Internal consistency of the generated coefficients: c^k symmetry
    // relation c^k(m, m') = (-1)^{m-m'} c^k(m', m).
    for (int k : {0, 2, 4})
        for (int m = -2; m <= 2; ++m)
            for (int mp = -2; mp <= 2; ++mp) {
                const double lhs = condon_shortley_ck(k, m, mp);
                const double rhs =
                    (((m - mp) % 2) ? -1.0 : 1.0) * condon_shortley_ck(k, mp, m);
                if (std::abs(lhs - rhs) > 1e-12)
                    throw InternalError("d_coulomb_integrals: c^k symmetry relation violated");
            }

    using cd = std::complex<double>;
    const auto u = real_d_transform();

    // Transform chemists' (pq|rs): bra-like slots p and r conjugated.
    std::vector<double> g(5 * 5 * 5 * 5, 0.0);
    double max_imag = 0.0;
    for (int p = 0; p < 5; ++p)
        for (int q = 0; q < 5; ++q)
            for (int r = 0; r < 5; ++r)
                for (int s = 0; s < 5; ++s) {
                    cd acc{0.0, 0.0};
                    for (int m1 = -2; m1 <= 2; ++m1)
                        for (int m2 = -2; m2 <= 2; ++m2)
                            for (int m3 = -2; m3 <= 2; ++m3) {
                                const int m4 = m1 + m3 - m2; // transfer conservation
                                if (m4 < -2 || m4 > 2) continue;
                                const double gc = complex_basis_coulomb(m1, m2, m3, m4, f);
                                if (gc == 0.0) continue;
                                acc += std::conj(u(p, m1 + 2)) * u(q, m2 + 2) *
                                       std::conj(u(r, m3 + 2)) * u(s, m4 + 2) * gc;
                            }
                    max_imag = std::max(max_imag, std::abs(acc.imag()));
                    g[((static_cast<std::size_t>(p) * 5 + q) * 5 + r) * 5 + s] = acc.real();
                }
    if (max_imag > 1e-10)
        throw InternalError("d_coulomb_integrals: real-basis integrals kept an imaginary part");

    // Verify the 8-fold symmetry of the raw tensor before storing.
    auto at = [&](int p, int q, int r, int s) {
        return g[((static_cast<std::size_t>(p) * 5 + q) * 5 + r) * 5 + s];
    };
    IntegralSet ints(d_norb);
    for (int p = 0; p < 5; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r < 5; ++r)
                for (int s = 0; s <= r; ++s) {
                    if (p * 5 + q < r * 5 + s) continue;
                    const double v = at(p, q, r, s);
                    for (double image : {at(q, p, r, s), at(p, q, s, r), at(r, s, p, q)})
                        if (std::abs(image - v) > 1e-10 * std::max(1.0, std::abs(v)))
                            throw InternalError(
                                "d_coulomb_integrals: transformed tensor lost 8-fold symmetry");
                    ints.set_two(p, q, r, s, cm1_to_hartree(v));
                }
    return ints;
}

IntegralSet crystal_field_oh(const CrystalField& cf) {
    if (!std::isfinite(cf.dq_cm1)) throw ParameterError("crystal_field_oh: Dq must be finite");
    IntegralSet ints(d_norb);
    for (int p : eg_orbitals) ints.set_one(p, p, cm1_to_hartree(6.0 * cf.dq_cm1));
    for (int p : t2g_orbitals) ints.set_one(p, p, cm1_to_hartree(-4.0 * cf.dq_cm1));
    return ints;
}

IntegralSet d_ion_integrals(const RacahParameters& rp, const CrystalField& cf) {
    IntegralSet ints = d_coulomb_integrals(rp);
    const IntegralSet one = crystal_field_oh(cf);
    for (int p = 0; p < d_norb; ++p) ints.add_one(p, p, one.one(p, p));
    return ints;
}

// --------------------------- Tanabe-Sugano ---------------------------------

namespace {

SectorSpec dn_sector(int n_electrons) {
    if (n_electrons < 1 || n_electrons > 9)
        throw ParameterError("tanabe_sugano: electron count must lie in [1, 9]");
    const int nb = n_electrons / 2;
    return SectorSpec{d_norb, n_electrons - nb, nb};
}

// Terms from a labeled spectrum: degenerate groups split by multiplicity.
std::vector<TSTerm> collect_terms(const Spectrum& labeled, double b_hartree,
                                  double degeneracy_tol) {
    std::vector<TSTerm> terms;
    const auto groups = group_degenerate(labeled.values, degeneracy_tol);
    for (const auto& g : groups) {
        std::map<int, int> by_mult;
        std::map<int, double> energy_sum;
        for (int idx : g) {
            const int mult = labeled.labels[static_cast<std::size_t>(idx)].multiplicity;
            ++by_mult[mult];
            energy_sum[mult] += labeled.values[idx];
        }
        for (const auto& [mult, count] : by_mult) {
            TSTerm t;
            t.multiplicity = mult;
            t.sector_count = count;
            t.degeneracy = count * mult;
            t.energy_eb = energy_sum[mult] / count / b_hartree;
            terms.push_back(t);
        }
    }
    std::sort(terms.begin(), terms.end(), [](const TSTerm& a, const TSTerm& b) {
        if (a.energy_eb != b.energy_eb) return a.energy_eb < b.energy_eb;
        return a.multiplicity < b.multiplicity;
    });
    // Re-zero against the ground term so its line is identically zero.
    const double ground = terms.front().energy_eb;
    for (auto& t : terms) t.energy_eb -= ground;
    return terms;
}

double lowest_of_mult(const TSPoint& pt, int mult) {
    for (const auto& t : pt.terms)
        if (t.multiplicity == mult) return t.energy_eb;
    return std::numeric_limits<double>::quiet_NaN();
}

} // namespace

TSPoint ts_solve_point(int n_electrons, const RacahParameters& rp, double dq_over_b) {
    const SectorSpec spec = dn_sector(n_electrons);
    static thread_local std::map<std::pair<int, long long>, std::pair<IntegralSet, SectorBasis>>
        cache;
    // The Coulomb tensor and basis depend only on (n, B, C, A); cache them
    // across sweep points.
    const long long key =
        static_cast<long long>(rp.b_cm1 * 1e6) ^ (static_cast<long long>(rp.c_cm1 * 1e3) << 17) ^
        (static_cast<long long>(rp.a_cm1) << 41);
    auto it = cache.find({n_electrons, key});
    if (it == cache.end()) {
        it = cache.emplace(std::make_pair(n_electrons, key),
                           std::make_pair(d_coulomb_integrals(rp), build_sector_basis(spec)))
                 .first;
    }
    IntegralSet ints = it->second.first;
    const SectorBasis& basis = it->second.second;

    const CrystalField cf{dq_over_b * rp.b_cm1};
    const IntegralSet one = crystal_field_oh(cf);
    for (int p = 0; p < d_norb; ++p) ints.add_one(p, p, one.one(p, p));

    const auto h = build_hamiltonian(basis, ints);
    const auto s2 = build_total_s2(basis);
    const auto labeled =
        assign_spin(diagonalize(h), s2, default_spin_tol, default_degeneracy_tol, spec.sz());

    TSPoint pt;
    pt.dq_over_b = dq_over_b;
    pt.terms = collect_terms(labeled, cm1_to_hartree(rp.b_cm1), default_degeneracy_tol);
    return pt;
}

TSCurve tanabe_sugano(int n_electrons, const RacahParameters& rp, const TSOptions& opts) {
    if (opts.points < 2) throw ParameterError("tanabe_sugano: at least two sweep points required");
    if (!(opts.x_max > opts.x_min)) throw ParameterError("tanabe_sugano: empty sweep range");

    TSCurve curve;
    curve.n_electrons = n_electrons;
    curve.rp = rp;
    curve.sweep.resize(static_cast<std::size_t>(opts.points));
    for (int i = 0; i < opts.points; ++i) {
        const double x =
            opts.x_min + (opts.x_max - opts.x_min) * static_cast<double>(i) / (opts.points - 1);
        curve.sweep[static_cast<std::size_t>(i)] = ts_solve_point(n_electrons, rp, x);
    }

    // Flag rank ambiguities: same-multiplicity terms degenerate at a point
    // make "n-th lowest of multiplicity m" ill-defined there.
    for (const auto& pt : curve.sweep) {
        std::map<int, std::vector<double>> by_mult;
        for (const auto& t : pt.terms) by_mult[t.multiplicity].push_back(t.energy_eb);
        for (const auto& [mult, energies] : by_mult)
            for (std::size_t i = 1; i < energies.size(); ++i)
                if (energies[i] - energies[i - 1] < 1e-12) {
                    std::ostringstream msg;
                    msg << "degenerate multiplicity-" << mult << " terms at Dq/B=" << pt.dq_over_b;
                    curve.flags.push_back(msg.str());
                }
    }

    curve.crossings = find_crossings(curve, CrossingQuery::ground);
    return curve;
}

std::vector<TSCrossing> find_crossings(const TSCurve& curve, CrossingQuery query, int mult_a,
                                       int mult_b) {
    std::vector<TSCrossing> out;
    if (curve.sweep.size() < 2) return out;

    auto ground_mult = [](const TSPoint& pt) { return pt.terms.front().multiplicity; };

    if (query == CrossingQuery::ground) {
        for (std::size_t i = 1; i < curve.sweep.size(); ++i) {
            const int m_lo = ground_mult(curve.sweep[i - 1]);
            const int m_hi = ground_mult(curve.sweep[i]);
            if (m_lo == m_hi) continue;
            // Bisection on the gap between the two competing terms.
            double lo = curve.sweep[i - 1].dq_over_b;
            double hi = curve.sweep[i].dq_over_b;
            for (int iter = 0; iter < 60; ++iter) {
                const double mid = 0.5 * (lo + hi);
                const TSPoint pt = ts_solve_point(curve.n_electrons, curve.rp, mid);
                if (ground_mult(pt) == m_lo)
                    lo = mid;
                else
                    hi = mid;
            }
            TSCrossing c;
            c.kind = TSCrossing::Kind::spin_crossover;
            c.dq_over_b = 0.5 * (lo + hi);
            c.mult_low = m_lo;
            c.mult_high = m_hi;
            // Local slopes of the two competing absolute energies, from the
            // relative curves re-referenced at the bracketing points.
            const double dx = std::max(1e-4, 1e-3 * (hi - lo));
            const TSPoint pl = ts_solve_point(curve.n_electrons, curve.rp, c.dq_over_b - dx);
            const TSPoint pr = ts_solve_point(curve.n_electrons, curve.rp, c.dq_over_b + dx);
            // Relative to the m_lo term: its own slope is 0 by construction
            // on the left; report the slope of each tracked multiplicity's
            // lowest term against the other.
            c.slope_low = (lowest_of_mult(pr, m_lo) - lowest_of_mult(pl, m_lo)) / (2 * dx);
            c.slope_high = (lowest_of_mult(pr, m_hi) - lowest_of_mult(pl, m_hi)) / (2 * dx);
            out.push_back(c);
        }
        return out;
    }

    if (mult_a == 0 || mult_b == 0 || mult_a == mult_b)
        throw ParameterError("find_crossings: excited query needs two distinct multiplicities");

    // Gap of the two tracked excited curves, NaN when either is the ground.
    auto gap_at = [&](const TSPoint& pt) -> double {
        const double ea = lowest_of_mult(pt, mult_a);
        const double eb = lowest_of_mult(pt, mult_b);
        if (std::isnan(ea) || std::isnan(eb)) return std::numeric_limits<double>::quiet_NaN();
        if (ea <= 0.0 || eb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
        return ea - eb;
    };

    for (std::size_t i = 1; i < curve.sweep.size(); ++i) {
        const double g0 = gap_at(curve.sweep[i - 1]);
        const double g1 = gap_at(curve.sweep[i]);
        if (std::isnan(g0) || std::isnan(g1)) continue;
        if (g0 == 0.0 || g0 * g1 > 0.0) continue;
        double lo = curve.sweep[i - 1].dq_over_b;
        double hi = curve.sweep[i].dq_over_b;
        double glo = g0;
        for (int iter = 0; iter < 60; ++iter) {
            const double mid = 0.5 * (lo + hi);
            const double gm = gap_at(ts_solve_point(curve.n_electrons, curve.rp, mid));
            if (std::isnan(gm)) break;
            if ((gm < 0.0) == (glo < 0.0)) {
                lo = mid;
                glo = gm;
            } else {
                hi = mid;
            }
        }
        TSCrossing c;
        c.kind = TSCrossing::Kind::excited_crossing;
        c.dq_over_b = 0.5 * (lo + hi);
        c.mult_low = mult_a;
        c.mult_high = mult_b;
        const double dx = 1e-4;
        const TSPoint pl = ts_solve_point(curve.n_electrons, curve.rp, c.dq_over_b - dx);
        const TSPoint pr = ts_solve_point(curve.n_electrons, curve.rp, c.dq_over_b + dx);
        c.slope_low = (lowest_of_mult(pr, mult_a) - lowest_of_mult(pl, mult_a)) / (2 * dx);
        c.slope_high = (lowest_of_mult(pr, mult_b) - lowest_of_mult(pl, mult_b)) / (2 * dx);
        out.push_back(c);
    }
    return out;
}

} // namespace edspin
