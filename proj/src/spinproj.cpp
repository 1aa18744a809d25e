#include "edspin/spinproj.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "edspin/errors.hpp"
#include "edspin/units.hpp"

namespace edspin {

std::map<int, double> SpinProjectorSet::split_by_number(const Eigen::VectorXd& v) const {
    std::map<int, double> out;
    for (std::int64_t i = 0; i < v.size(); ++i) {
        const double w = v[i] * v[i];
        if (w == 0.0) continue;
        out[static_cast<int>(std::lround(number_diag_[i]))] += w;
    }
    return out;
}

SpinProjectorSet build_projectors(const SectorBasis& basis, const Fragment& frag) {
    const auto s2 = build_local_s2(basis, frag);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es{Eigen::MatrixXd(s2.mat)};
    if (es.info() != Eigen::Success)
        throw SolverError("build_projectors: eigendecomposition of fragment S^2 failed");

    const Eigen::VectorXd& vals = es.eigenvalues();
    const std::int64_t n = vals.size();
    std::vector<SpinProjectorSet::Sector> sectors;
    std::int64_t i = 0;
    while (i < n) {
        const double s = nearest_spin_value(vals[i]);
        const double target = s * (s + 1.0);
        if (std::abs(vals[i] - target) > 1e-6) {
            std::ostringstream msg;
            msg << "build_projectors: fragment S^2 eigenvalue " << vals[i]
                << " is not within 1e-6 of any s(s+1)";
            throw InternalError(msg.str());
        }
        std::int64_t j = i;
        while (j < n && std::abs(vals[j] - target) <= 1e-6) ++j;
        SpinProjectorSet::Sector sector;
        sector.s = s;
        sector.basis = es.eigenvectors().middleCols(i, j - i);
        sectors.push_back(std::move(sector));
        i = j;
    }
    std::sort(sectors.begin(), sectors.end(),
              [](const auto& a, const auto& b) { return a.s < b.s; });
    return SpinProjectorSet(frag, std::move(sectors), fragment_number_diagonal(basis, frag));
}

double JointWeights::total() const {
    double t = 0.0;
    for (const auto& [key, v] : w) t += v;
    return t;
}

std::map<std::pair<int, int>, double> JointWeights::by_spin() const {
    std::map<std::pair<int, int>, double> out;
    for (const auto& [key, v] : w) out[{std::get<0>(key), std::get<1>(key)}] += v;
    return out;
}

std::map<int, double> JointWeights::number_distribution() const {
    std::map<int, double> out;
    for (const auto& [key, v] : w) out[std::get<2>(key)] += v;
    return out;
}

double JointWeights::charge_transfer_weight(int nominal_na) const {
    double ct = 0.0;
    for (const auto& [key, v] : w)
        if (std::get<2>(key) != nominal_na) ct += v;
    return ct;
}

double JointWeights::weight_of(double s_a, double s_b) const {
    const int ka = static_cast<int>(std::lround(2.0 * s_a));
    const int kb = static_cast<int>(std::lround(2.0 * s_b));
    double out = 0.0;
    for (const auto& [key, v] : w)
        if (std::get<0>(key) == ka && std::get<1>(key) == kb) out += v;
    return out;
}

JointWeights joint_decompose(const Eigen::VectorXd& state, const SpinProjectorSet& set_a,
                             const SpinProjectorSet& set_b) {
    if (state.size() != set_a.dim() || state.size() != set_b.dim())
        throw ParameterError("joint_decompose: dimension mismatch");
    if (!set_a.fragment().disjoint_with(set_b.fragment()))
        throw ParameterError("joint_decompose: fragments must be disjoint");
    if (std::abs(state.norm() - 1.0) > 1e-8)
        throw ParameterError("joint_decompose: state is not normalized");

    JointWeights out;
    for (std::size_t ia = 0; ia < set_a.sectors().size(); ++ia) {
        const Eigen::VectorXd pa = set_a.project(ia, state);
        if (pa.squaredNorm() < 1e-24) continue;
        const int ka = static_cast<int>(std::lround(2.0 * set_a.sectors()[ia].s));
        for (std::size_t ib = 0; ib < set_b.sectors().size(); ++ib) {
            const Eigen::VectorXd pab = set_b.project(ib, pa);
            if (pab.squaredNorm() < 1e-24) continue;
            const int kb = static_cast<int>(std::lround(2.0 * set_b.sectors()[ib].s));
            // The fragment-A electron count commutes with both projectors,
            // so the residual split is exact.
            for (const auto& [na, wn] : set_a.split_by_number(pab))
                if (wn > 0.0) out.w[{ka, kb, na}] += wn;
        }
    }
    return out;
}

ProjectionTable make_projection_table(const Spectrum& labeled, const SpinProjectorSet& set_a,
                                      const SpinProjectorSet& set_b, int nominal_na) {
    if (labeled.size() > 0 && labeled.labels.empty())
        throw ParameterError("make_projection_table: spectrum must carry spin labels");
    ProjectionTable table;
    const double e0 = labeled.size() > 0 ? labeled.values[0] : 0.0;
    std::map<std::pair<int, int>, bool> seen;
    for (std::int64_t i = 0; i < labeled.size(); ++i) {
        const JointWeights jw = joint_decompose(labeled.vectors.col(i), set_a, set_b);
        ProjectionRow row;
        row.state = static_cast<int>(i);
        row.energy_cm1 = hartree_to_cm1(labeled.values[i] - e0);
        row.multiplicity = labeled.labels[static_cast<std::size_t>(i)].multiplicity;
        row.weight_sum = jw.total();
        row.ct_weight = jw.charge_transfer_weight(nominal_na);
        row.number_distribution = jw.number_distribution();
        for (const auto& [key, v] : jw.by_spin()) {
            row.weights[key] = (v < 1e-12) ? 0.0 : v;
            seen[key] = true;
        }
        if (row.ct_weight < 1e-12) row.ct_weight = 0.0;
        table.rows.push_back(std::move(row));
    }
    for (const auto& [key, present] : seen) {
        (void)present;
        table.columns.push_back(key);
    }
    std::sort(table.columns.begin(), table.columns.end());
    return table;
}

// ---------------------------------------------------------------------------

namespace {

int doubled(double x) { return static_cast<int>(std::lround(2.0 * x)); }

// Index bookkeeping over the abstract product space |m_a, m_b>.
struct ProductSpace {
    double s_a, s_b;
    int na, nb; // dimensions 2s+1

    int index(int ka, int kb) const { // doubled m values
        const int ia = (doubled(s_a) - ka) / 2;
        const int ib = (doubled(s_b) - kb) / 2;
        return ia * nb + ib;
    }
    std::pair<int, int> doubled_ms(int idx) const {
        const int ia = idx / nb;
        const int ib = idx % nb;
        return {doubled(s_a) - 2 * ia, doubled(s_b) - 2 * ib};
    }
};

// Matrix of S- = S-_a + S-_b on the product space.
Eigen::MatrixXd lowering_matrix(const ProductSpace& ps) {
    const int dim = ps.na * ps.nb;
    Eigen::MatrixXd lm = Eigen::MatrixXd::Zero(dim, dim);
    auto factor = [](double s, double m) { return std::sqrt(s * (s + 1.0) - m * (m - 1.0)); };
    for (int idx = 0; idx < dim; ++idx) {
        const auto [ka, kb] = ps.doubled_ms(idx);
        const double ma = 0.5 * ka, mb = 0.5 * kb;
        if (ma > -ps.s_a + 0.5 - 1e-12) lm(ps.index(ka - 2, kb), idx) += factor(ps.s_a, ma);
        if (mb > -ps.s_b + 0.5 - 1e-12) lm(ps.index(ka, kb - 2), idx) += factor(ps.s_b, mb);
    }
    return lm;
}

CoupledState from_vector(const ProductSpace& ps, const Eigen::VectorXd& v, double s_total,
                         double m) {
    CoupledState st;
    st.s_a = ps.s_a;
    st.s_b = ps.s_b;
    st.s_total = s_total;
    st.m = m;
    for (int idx = 0; idx < v.size(); ++idx)
        if (std::abs(v[idx]) > 1e-14) st.amplitudes[ps.doubled_ms(idx)] = v[idx];
    return st;
}

} // namespace

std::map<std::pair<int, int>, double> CoupledState::weights() const {
    std::map<std::pair<int, int>, double> out;
    for (const auto& [key, a] : amplitudes) out[key] = a * a;
    return out;
}

CoupledState coupled_weights_oracle(double s_a, double s_b, double s_total) {
    if (s_a < 0 || s_b < 0 || std::abs(2 * s_a - std::lround(2 * s_a)) > 1e-12 ||
        std::abs(2 * s_b - std::lround(2 * s_b)) > 1e-12)
        throw ParameterError("coupled_weights_oracle: spins must be non-negative half-integers");
    if (s_total < std::abs(s_a - s_b) - 1e-12 || s_total > s_a + s_b + 1e-12)
        throw ParameterError("coupled_weights_oracle: triangle inequality violated");

    const ProductSpace ps{s_a, s_b, doubled(s_a) + 1, doubled(s_b) + 1};
    const Eigen::MatrixXd lm = lowering_matrix(ps);
    const int dim = ps.na * ps.nb;

    const double s_max = s_a + s_b;
    Eigen::VectorXd stretched = Eigen::VectorXd::Zero(dim);
    stretched[ps.index(doubled(s_a), doubled(s_b))] = 1.0;

    // Highest-weight vectors |s, m=s| built downwards by orthogonalization
    // against all higher multiplets descended to the same m.
    std::vector<std::pair<double, Eigen::VectorXd>> tops;
    tops.emplace_back(s_max, stretched);
    for (double s = s_max - 1.0; s >= s_total - 1e-9; s -= 1.0) {
        std::vector<Eigen::VectorXd> descended;
        for (const auto& [sh, top] : tops) {
            Eigen::VectorXd v = top;
            for (double m = sh; m > s + 1e-9; m -= 1.0) v = (lm * v).eval();
            v.normalize();
            descended.push_back(std::move(v));
        }
        const int km = doubled(s);
        std::vector<int> support; // m = s product subspace, descending m_a
        for (int idx = 0; idx < dim; ++idx) {
            const auto [ka, kb] = ps.doubled_ms(idx);
            if (ka + kb == km) support.push_back(idx);
        }
        if (static_cast<int>(support.size()) <= static_cast<int>(descended.size()))
            throw InternalError("coupled_weights_oracle: no room for a new multiplet");

        Eigen::VectorXd candidate = Eigen::VectorXd::Zero(dim);
        for (std::size_t trial = 0; trial < support.size(); ++trial) {
            candidate.setZero();
            candidate[support[trial]] = 1.0;
            for (int pass = 0; pass < 2; ++pass)
                for (const auto& d : descended) candidate -= d.dot(candidate) * d;
            if (candidate.norm() > 1e-8) break;
        }
        candidate.normalize();
        // Condon-Shortley phase: leading amplitude (largest m_a) positive.
        for (int idx : support) {
            if (std::abs(candidate[idx]) > 1e-12) {
                if (candidate[idx] < 0) candidate = -candidate;
                break;
            }
        }
        tops.emplace_back(s, candidate);
    }

    for (const auto& [s, v] : tops)
        if (std::abs(s - s_total) < 1e-9) return from_vector(ps, v, s_total, s_total);
    throw InternalError("coupled_weights_oracle: requested multiplet not constructed");
}

CoupledState lower_coupled_state(const CoupledState& state) {
    if (state.m <= -state.s_total + 1e-9)
        throw ParameterError("lower_coupled_state: already at the bottom of the multiplet");
    const ProductSpace ps{state.s_a, state.s_b, doubled(state.s_a) + 1, doubled(state.s_b) + 1};
    Eigen::VectorXd v = Eigen::VectorXd::Zero(ps.na * ps.nb);
    for (const auto& [key, a] : state.amplitudes) v[ps.index(key.first, key.second)] = a;
    v = (lowering_matrix(ps) * v).eval();
    v.normalize();
    return from_vector(ps, v, state.s_total, state.m - 1.0);
}

} // namespace edspin
