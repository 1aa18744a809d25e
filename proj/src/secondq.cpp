#include "edspin/secondq.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "edspin/errors.hpp"

namespace edspin {

namespace {

using Triplet = Eigen::Triplet<double>;

double max_abs(const SparseMat& m) {
    double mx = 0.0;
    for (int k = 0; k < m.outerSize(); ++k)
        for (SparseMat::InnerIterator it(m, k); it; ++it) mx = std::max(mx, std::abs(it.value()));
    return mx;
}

} // namespace

IntegralSet::IntegralSet(int norb, double core) : norb_(norb), core_(core) {
    if (norb < 0 || norb > max_orbitals) throw ParameterError("IntegralSet: norb out of range");
    h_.assign(static_cast<std::size_t>(norb) * norb, 0.0);
    g_.assign(static_cast<std::size_t>(norb) * norb * norb * norb, 0.0);
}

void IntegralSet::set_two(int p, int q, int r, int s, double v) {
    g_[idx4(p, q, r, s)] = v;
    g_[idx4(q, p, r, s)] = v;
    g_[idx4(p, q, s, r)] = v;
    g_[idx4(q, p, s, r)] = v;
    g_[idx4(r, s, p, q)] = v;
    g_[idx4(s, r, p, q)] = v;
    g_[idx4(r, s, q, p)] = v;
    g_[idx4(s, r, q, p)] = v;
}

void IntegralSet::validate() const {
    if (!std::isfinite(core_)) throw IntegrityError("IntegralSet: core energy not finite");
    for (double v : h_)
        if (!std::isfinite(v)) throw IntegrityError("IntegralSet: non-finite one-body value");
    for (double v : g_)
        if (!std::isfinite(v)) throw IntegrityError("IntegralSet: non-finite two-body value");

    double scale = 1.0;
    for (double v : h_) scale = std::max(scale, std::abs(v));
    for (double v : g_) scale = std::max(scale, std::abs(v));
    const double tol = 1e-12 * scale;

    for (int p = 0; p < norb_; ++p)
        for (int q = 0; q < norb_; ++q)
            if (std::abs(one(p, q) - one(q, p)) > tol)
                throw IntegrityError("IntegralSet: one-body matrix not symmetric");

    for (int p = 0; p < norb_; ++p)
        for (int q = 0; q < norb_; ++q)
            for (int r = 0; r < norb_; ++r)
                for (int s = 0; s < norb_; ++s) {
                    const double v = two(p, q, r, s);
                    if (std::abs(v - two(q, p, r, s)) > tol || std::abs(v - two(p, q, s, r)) > tol ||
                        std::abs(v - two(r, s, p, q)) > tol)
                        throw IntegrityError("IntegralSet: two-body tensor lacks 8-fold symmetry");
                }
}

IntegralSet IntegralSet::rotated(const Eigen::MatrixXd& rot) const {
    if (rot.rows() != norb_ || rot.cols() != norb_)
        throw ParameterError("IntegralSet::rotated: rotation must be norb x norb");
    if ((rot.transpose() * rot - Eigen::MatrixXd::Identity(norb_, norb_)).cwiseAbs().maxCoeff() > 1e-10)
        throw ParameterError("IntegralSet::rotated: matrix is not orthogonal");

    IntegralSet out(norb_, core_);

    Eigen::MatrixXd h(norb_, norb_);
    for (int p = 0; p < norb_; ++p)
        for (int q = 0; q < norb_; ++q) h(p, q) = one(p, q);
    Eigen::MatrixXd hr = rot.transpose() * h * rot;
    for (int p = 0; p < norb_; ++p)
        for (int q = 0; q < norb_; ++q) out.h_[out.idx2(p, q)] = 0.5 * (hr(p, q) + hr(q, p));

    // Quarter transforms, one index at a time.
    const int n = norb_;
    std::vector<double> t0 = g_, t1(g_.size());
    auto pass = [&](const std::vector<double>& in, std::vector<double>& dst, int slot) {
        std::fill(dst.begin(), dst.end(), 0.0);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    for (int d = 0; d < n; ++d) {
                        const double v = in[((static_cast<std::size_t>(a) * n + b) * n + c) * n + d];
                        if (v == 0.0) continue;
                        const int fixed[4] = {a, b, c, d};
                        for (int x = 0; x < n; ++x) {
                            int i[4] = {fixed[0], fixed[1], fixed[2], fixed[3]};
                            const double w = rot(fixed[slot], x);
                            if (w == 0.0) continue;
                            i[slot] = x;
                            dst[((static_cast<std::size_t>(i[0]) * n + i[1]) * n + i[2]) * n + i[3]] += v * w;
                        }
                    }
    };
    pass(t0, t1, 0);
    pass(t1, t0, 1);
    pass(t0, t1, 2);
    pass(t1, t0, 3);

    // Average over the 8-fold images so the stored tensor is exactly symmetric.
    for (int p = 0; p < n; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r < n; ++r)
                for (int s = 0; s <= r; ++s) {
                    if (p * n + q < r * n + s) continue;
                    auto at = [&](int a, int b, int c, int d) -> double& {
                        return t0[((static_cast<std::size_t>(a) * n + b) * n + c) * n + d];
                    };
                    const double v = (at(p, q, r, s) + at(q, p, r, s) + at(p, q, s, r) + at(q, p, s, r) +
                                      at(r, s, p, q) + at(s, r, p, q) + at(r, s, q, p) + at(s, r, q, p)) /
                                     8.0;
                    out.set_two(p, q, r, s, v);
                }
    return out;
}

void OperatorMatrix::assert_symmetric(double tol) const {
    SparseMat diff = SparseMat(mat.transpose()) - mat;
    const double scale = std::max(1.0, max_abs(mat));
    if (max_abs(diff) > tol * scale)
        throw InternalError("OperatorMatrix: matrix is not symmetric within tolerance");
}

Fragment all_orbitals_fragment(int norb) {
    Fragment f;
    f.orbitals.resize(static_cast<std::size_t>(norb));
    for (int p = 0; p < norb; ++p) f.orbitals[static_cast<std::size_t>(p)] = p;
    return f;
}

namespace {

// Slater-Condon matrix element machinery. Channel-resolved occupation
// lists are rebuilt per row; the pair loop dominates anyway.

double diagonal_element(const Determinant& d, const IntegralSet& ints) {
    const auto occ_a = occupied_orbitals(d.alpha);
    const auto occ_b = occupied_orbitals(d.beta);
    double e = ints.core_energy();
    for (int p : occ_a) e += ints.one(p, p);
    for (int p : occ_b) e += ints.one(p, p);
    for (std::size_t i = 0; i < occ_a.size(); ++i)
        for (std::size_t j = i + 1; j < occ_a.size(); ++j) {
            const int p = occ_a[i], q = occ_a[j];
            e += ints.two(p, p, q, q) - ints.two(p, q, q, p);
        }
    for (std::size_t i = 0; i < occ_b.size(); ++i)
        for (std::size_t j = i + 1; j < occ_b.size(); ++j) {
            const int p = occ_b[i], q = occ_b[j];
            e += ints.two(p, p, q, q) - ints.two(p, q, q, p);
        }
    for (int p : occ_a)
        for (int q : occ_b) e += ints.two(p, p, q, q);
    return e;
}

// <Dj|H|Di> for a single excitation hole->part in channel s.
double single_element(const Determinant& di, int hole, int part, Spin s, const IntegralSet& ints) {
    const auto exc = apply_excitation(di, part, hole, s);
    double v = ints.one(hole, part);
    const std::uint32_t same = di.channel(s) & ~(1u << hole);
    const std::uint32_t other = di.channel(s == Spin::up ? Spin::down : Spin::up);
    for (int q : occupied_orbitals(same))
        v += ints.two(hole, part, q, q) - ints.two(hole, q, q, part);
    for (int q : occupied_orbitals(other)) v += ints.two(hole, part, q, q);
    return exc->phase * v;
}

// Both excitations inside one channel.
double double_same_channel(const Determinant& di, int h1, int h2, int p1, int p2, Spin s,
                           const IntegralSet& ints) {
    const auto e1 = apply_excitation(di, p1, h1, s);
    const auto e2 = apply_excitation(e1->det, p2, h2, s);
    const double v = ints.two(h1, p1, h2, p2) - ints.two(h1, p2, h2, p1);
    return e1->phase * e2->phase * v;
}

double double_mixed(const Determinant& di, int ha, int pa, int hb, int pb, const IntegralSet& ints) {
    const auto ea = apply_excitation(di, pa, ha, Spin::up);
    const auto eb = apply_excitation(di, pb, hb, Spin::down);
    return ea->phase * eb->phase * ints.two(ha, pa, hb, pb);
}

double pair_element(const Determinant& di, const Determinant& dj, const IntegralSet& ints) {
    const std::uint32_t xa = di.alpha ^ dj.alpha;
    const std::uint32_t xb = di.beta ^ dj.beta;
    const int na = std::popcount(xa);
    const int nb = std::popcount(xb);
    const int degree = (na + nb) / 2;

    if (degree > 2) return 0.0;
    if (degree == 0) return diagonal_element(di, ints);

    if (degree == 1) {
        const Spin s = (na == 2) ? Spin::up : Spin::down;
        const std::uint32_t x = (na == 2) ? xa : xb;
        const int hole = std::countr_zero(x & di.channel(s));
        const int part = std::countr_zero(x & dj.channel(s));
        return single_element(di, hole, part, s, ints);
    }

    // degree == 2
    if (na == 2 && nb == 2) {
        const int ha = std::countr_zero(xa & di.alpha);
        const int pa = std::countr_zero(xa & dj.alpha);
        const int hb = std::countr_zero(xb & di.beta);
        const int pb = std::countr_zero(xb & dj.beta);
        return double_mixed(di, ha, pa, hb, pb, ints);
    }
    const Spin s = (na == 4) ? Spin::up : Spin::down;
    const std::uint32_t x = (na == 4) ? xa : xb;
    const auto holes = occupied_orbitals(x & di.channel(s));
    const auto parts = occupied_orbitals(x & dj.channel(s));
    return double_same_channel(di, holes[0], holes[1], parts[0], parts[1], s, ints);
}

OperatorMatrix hamiltonian_slater_condon(const SectorBasis& basis, const IntegralSet& ints) {
    const auto n = static_cast<std::int64_t>(basis.size());
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(n) * 8);
    for (std::int64_t i = 0; i < n; ++i) {
        const Determinant& di = basis.det(static_cast<std::size_t>(i));
        trips.emplace_back(i, i, diagonal_element(di, ints));
        for (std::int64_t j = i + 1; j < n; ++j) {
            const Determinant& dj = basis.det(static_cast<std::size_t>(j));
            const std::uint32_t xa = di.alpha ^ dj.alpha;
            const std::uint32_t xb = di.beta ^ dj.beta;
            if (std::popcount(xa) + std::popcount(xb) > 4) continue;
            const double v = pair_element(di, dj, ints);
            if (v != 0.0) {
                trips.emplace_back(i, j, v);
                trips.emplace_back(j, i, v);
            }
        }
    }
    OperatorMatrix op;
    op.mat = SparseMat(n, n);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

OperatorMatrix hamiltonian_composed(const SectorBasis& basis, const IntegralSet& ints) {
    const auto n = static_cast<std::int64_t>(basis.size());
    const int norb = ints.norb();

    std::vector<Eigen::MatrixXd> exc(static_cast<std::size_t>(norb) * norb);
    for (int p = 0; p < norb; ++p)
        for (int q = 0; q < norb; ++q)
            exc[static_cast<std::size_t>(p) * norb + q] =
                Eigen::MatrixXd(build_excitation(basis, p, q).mat);

    Eigen::MatrixXd h = ints.core_energy() * Eigen::MatrixXd::Identity(n, n);
    for (int p = 0; p < norb; ++p)
        for (int q = 0; q < norb; ++q) {
            const double hv = ints.one(p, q);
            if (hv != 0.0) h += hv * exc[static_cast<std::size_t>(p) * norb + q];
        }
    for (int p = 0; p < norb; ++p)
        for (int q = 0; q < norb; ++q)
            for (int r = 0; r < norb; ++r)
                for (int s = 0; s < norb; ++s) {
                    const double g = ints.two(p, q, r, s);
                    if (g == 0.0) continue;
                    h += 0.5 * g * (exc[static_cast<std::size_t>(p) * norb + q] *
                                    exc[static_cast<std::size_t>(r) * norb + s]);
                    if (q == r)
                        h -= 0.5 * g * exc[static_cast<std::size_t>(p) * norb + s];
                }

    OperatorMatrix op;
    op.mat = h.sparseView(1.0, 0.0);
    op.mat.makeCompressed();
    return op;
}

} // namespace

OperatorMatrix build_hamiltonian(const SectorBasis& basis, const IntegralSet& ints,
                                 HamiltonianRoute route) {
    if (ints.norb() != basis.spec().norb)
        throw ParameterError("build_hamiltonian: integral set and basis disagree on norb");
    ints.validate();
    OperatorMatrix op = (route == HamiltonianRoute::slater_condon)
                            ? hamiltonian_slater_condon(basis, ints)
                            : hamiltonian_composed(basis, ints);
    op.assert_symmetric();
    return op;
}

OperatorMatrix build_excitation(const SectorBasis& basis, int p, int q) {
    const int norb = basis.spec().norb;
    if (p < 0 || p >= norb || q < 0 || q >= norb)
        throw ParameterError("build_excitation: orbital index out of range");
    const auto n = static_cast<std::int64_t>(basis.size());
    std::vector<Triplet> trips;
    for (std::int64_t j = 0; j < n; ++j) {
        const Determinant& d = basis.det(static_cast<std::size_t>(j));
        for (Spin s : {Spin::up, Spin::down}) {
            const auto r = apply_excitation(d, p, q, s);
            if (!r) continue;
            const std::int64_t i = basis.index_of(r->det);
            if (i < 0) continue; // restriction to a truncated basis
            trips.emplace_back(i, j, static_cast<double>(r->phase));
        }
    }
    OperatorMatrix op;
    op.mat = SparseMat(n, n);
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

namespace {

// Shared builder for fragment ladder operators. `raise_spin` moves a down
// electron up (S+); otherwise up goes down (S-).
LadderOperator build_ladder(const SectorBasis& basis, const Fragment& frag, bool raise_spin) {
    const SectorSpec& spec = basis.spec();
    for (int p : frag.orbitals)
        if (p < 0 || p >= spec.norb) throw ParameterError("fragment orbital out of range");

    struct Move {
        Determinant target;
        std::int64_t source;
        double value;
    };
    std::vector<Move> moves;
    for (std::size_t j = 0; j < basis.size(); ++j) {
        const Determinant& d = basis.det(j);
        for (int p : frag.orbitals) {
            const Spin from = raise_spin ? Spin::down : Spin::up;
            const Spin to = raise_spin ? Spin::up : Spin::down;
            const auto killed = apply_annihilate(d, p, from);
            if (!killed) continue;
            const auto raised = apply_create(killed->det, p, to);
            if (!raised) continue;
            moves.push_back(Move{raised->det, static_cast<std::int64_t>(j),
                                 static_cast<double>(killed->phase * raised->phase)});
        }
    }

    std::vector<Determinant> images;
    images.reserve(moves.size());
    for (const auto& m : moves) images.push_back(m.target);
    std::sort(images.begin(), images.end());
    images.erase(std::unique(images.begin(), images.end()), images.end());

    SectorSpec image_spec = spec;
    image_spec.nalpha += raise_spin ? 1 : -1;
    image_spec.nbeta += raise_spin ? -1 : 1;

    LadderOperator op;
    if (moves.empty()) {
        image_spec.nalpha = std::clamp(image_spec.nalpha, 0, spec.norb);
        image_spec.nbeta = std::clamp(image_spec.nbeta, 0, spec.norb);
        op.image = SectorBasis::from_determinants(image_spec, {});
        op.mat = SparseMat(0, static_cast<std::int64_t>(basis.size()));
        return op;
    }
    op.image = SectorBasis::from_determinants(image_spec, images);

    std::vector<Triplet> trips;
    trips.reserve(moves.size());
    for (const auto& m : moves)
        trips.emplace_back(op.image.index_of(m.target), m.source, m.value);
    op.mat = SparseMat(static_cast<std::int64_t>(op.image.size()),
                       static_cast<std::int64_t>(basis.size()));
    op.mat.setFromTriplets(trips.begin(), trips.end());
    op.mat.makeCompressed();
    return op;
}

SparseMat diagonal_sparse(const Eigen::VectorXd& d) {
    std::vector<Triplet> trips;
    trips.reserve(static_cast<std::size_t>(d.size()));
    for (std::int64_t i = 0; i < d.size(); ++i)
        if (d[i] != 0.0) trips.emplace_back(i, i, d[i]);
    SparseMat m(d.size(), d.size());
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

} // namespace

LadderOperator build_ladder_plus(const SectorBasis& basis, const Fragment& frag) {
    return build_ladder(basis, frag, true);
}

LadderOperator build_ladder_minus(const SectorBasis& basis, const Fragment& frag) {
    return build_ladder(basis, frag, false);
}

Eigen::VectorXd fragment_sz_diagonal(const SectorBasis& basis, const Fragment& frag) {
    const std::uint32_t mask = frag.mask();
    Eigen::VectorXd sz(static_cast<std::int64_t>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Determinant& d = basis.det(i);
        sz[static_cast<std::int64_t>(i)] =
            0.5 * (std::popcount(d.alpha & mask) - std::popcount(d.beta & mask));
    }
    return sz;
}

Eigen::VectorXd fragment_number_diagonal(const SectorBasis& basis, const Fragment& frag) {
    const std::uint32_t mask = frag.mask();
    Eigen::VectorXd nd(static_cast<std::int64_t>(basis.size()));
    for (std::size_t i = 0; i < basis.size(); ++i) {
        const Determinant& d = basis.det(i);
        nd[static_cast<std::int64_t>(i)] =
            static_cast<double>(std::popcount(d.alpha & mask) + std::popcount(d.beta & mask));
    }
    return nd;
}

OperatorMatrix build_local_s2(const SectorBasis& basis, const Fragment& frag) {
    const LadderOperator plus = build_ladder_plus(basis, frag);
    const Eigen::VectorXd sz = fragment_sz_diagonal(basis, frag);
    Eigen::VectorXd diag = sz.array() * (sz.array() + 1.0);

    OperatorMatrix op;
    op.mat = SparseMat(SparseMat(plus.mat.transpose()) * plus.mat) + diagonal_sparse(diag);
    op.mat.makeCompressed();
    op.assert_symmetric();
    return op;
}

OperatorMatrix build_total_s2(const SectorBasis& basis) {
    return build_local_s2(basis, all_orbitals_fragment(basis.spec().norb));
}

OperatorMatrix build_spin_dot(const SectorBasis& basis, const Fragment& a, const Fragment& b) {
    if (!a.disjoint_with(b)) throw ParameterError("build_spin_dot: fragments must be disjoint");

    // Both ladder matrices must share one image index set for the products.
    auto shared_pair = [&](bool raise_spin) {
        LadderOperator la = build_ladder(basis, a, raise_spin);
        LadderOperator lb = build_ladder(basis, b, raise_spin);
        std::vector<Determinant> dets = la.image.determinants();
        dets.insert(dets.end(), lb.image.determinants().begin(), lb.image.determinants().end());
        SectorSpec spec = basis.spec();
        spec.nalpha += raise_spin ? 1 : -1;
        spec.nbeta += raise_spin ? -1 : 1;
        spec.nalpha = std::clamp(spec.nalpha, 0, spec.norb);
        spec.nbeta = std::clamp(spec.nbeta, 0, spec.norb);
        SectorBasis image = SectorBasis::from_determinants(spec, std::move(dets));

        auto lift = [&](const LadderOperator& l) {
            std::vector<Triplet> trips;
            for (int k = 0; k < l.mat.outerSize(); ++k)
                for (SparseMat::InnerIterator it(l.mat, k); it; ++it)
                    trips.emplace_back(image.index_of(l.image.det(static_cast<std::size_t>(it.row()))),
                                       it.col(), it.value());
            SparseMat m(static_cast<std::int64_t>(image.size()),
                        static_cast<std::int64_t>(basis.size()));
            m.setFromTriplets(trips.begin(), trips.end());
            return m;
        };
        return std::pair<SparseMat, SparseMat>{lift(la), lift(lb)};
    };

    const auto [pa, pb] = shared_pair(true);
    const auto [ma, mb] = shared_pair(false);

    const Eigen::VectorXd sza = fragment_sz_diagonal(basis, a);
    const Eigen::VectorXd szb = fragment_sz_diagonal(basis, b);
    Eigen::VectorXd diag = sza.array() * szb.array();

    OperatorMatrix op;
    op.mat = SparseMat(0.5 * (SparseMat(ma.transpose()) * mb + SparseMat(pa.transpose()) * pb)) +
             diagonal_sparse(diag);
    op.mat.makeCompressed();
    op.assert_symmetric(1e-11);
    return op;
}

} // namespace edspin
