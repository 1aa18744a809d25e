#include "edspin/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "edspin/errors.hpp"
#include "edspin/units.hpp"

namespace edspin {

SpinmerismParams SpinmerismParams::defaults() {
    SpinmerismParams p;
    p.rp = RacahParameters::fe2_defaults();
    p.dq_cm1 = 2400.0;
    p.eps_l_cm1 = 8000.0;
    p.u_l_cm1 = 60000.0;
    p.t_ml_cm1 = 0.0;
    p.k_ml_cm1 = 200.0;
    p.k_ll_cm1 = 60.0;
    return p;
}

Fragment metal_fragment() { return Fragment{{0, 1, 2, 3, 4}}; }
Fragment ligand_fragment() { return Fragment{{5, 6}}; }
SectorSpec spinmerism_sector() { return SectorSpec{spinmerism_norb, 4, 4}; }

IntegralSet build_spinmerism(const SpinmerismParams& params) {
    if (params.u_l_cm1 < 0.0) throw ParameterError("build_spinmerism: U_L must be non-negative");

    const IntegralSet d = d_ion_integrals(params.rp, CrystalField{params.dq_cm1});
    IntegralSet ints(spinmerism_norb);

    for (int p = 0; p < d_norb; ++p)
        for (int q = 0; q <= p; ++q) ints.set_one(p, q, d.one(p, q));
    for (int p = 0; p < d_norb; ++p)
        for (int q = 0; q <= p; ++q)
            for (int r = 0; r < d_norb; ++r)
                for (int s = 0; s <= r; ++s) {
                    if (p * d_norb + q < r * d_norb + s) continue;
                    const double v = d.two(p, q, r, s);
                    if (v != 0.0) ints.set_two(p, q, r, s, v);
                }

    ints.set_one(5, 5, cm1_to_hartree(params.eps_l_cm1));
    ints.set_one(6, 6, cm1_to_hartree(params.eps_l_cm1));
    ints.set_two(5, 5, 5, 5, cm1_to_hartree(params.u_l_cm1));
    ints.set_two(6, 6, 6, 6, cm1_to_hartree(params.u_l_cm1));

    // Sigma-compatible hopping: ligand 5 against dz2, ligand 6 against dx2-y2.
    ints.set_one(0, 5, cm1_to_hartree(params.t_ml_cm1));
    ints.set_one(1, 6, cm1_to_hartree(params.t_ml_cm1));

    for (int p = 0; p < d_norb; ++p)
        for (int l : {5, 6}) ints.set_two(p, l, l, p, cm1_to_hartree(params.k_ml_cm1));
    ints.set_two(5, 6, 6, 5, cm1_to_hartree(params.k_ll_cm1));
    return ints;
}

// ---------------------------------------------------------------------------

SpinBlockWorkspace::SpinBlockWorkspace(SectorBasis basis) : basis_(std::move(basis)) {
    s2_ = build_total_s2(basis_);
    total_ = build_projectors(basis_, all_orbitals_fragment(basis_.spec().norb));
}

std::vector<double> SpinBlockWorkspace::spin_values() const {
    std::vector<double> out;
    for (const auto& sector : total_.sectors()) out.push_back(sector.s);
    return out;
}

Spectrum SpinBlockWorkspace::solve_spin_block(const OperatorMatrix& h, double s, int k) const {
    const SpinProjectorSet::Sector* sector = nullptr;
    for (const auto& sec : total_.sectors())
        if (std::abs(sec.s - s) < 1e-9) sector = &sec;
    if (!sector) throw ParameterError("solve_spin_block: no such spin value in this sector");

    const Eigen::MatrixXd& v = sector->basis;
    Eigen::MatrixXd block = v.transpose() * (h.mat * v);
    block = 0.5 * (block + block.transpose()).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(block);
    if (es.info() != Eigen::Success)
        throw SolverError("solve_spin_block: block eigensolver failed");

    const std::int64_t keep =
        (k < 0) ? block.rows() : std::min<std::int64_t>(k, block.rows());
    Spectrum out;
    out.values = es.eigenvalues().head(keep);
    out.vectors = v * es.eigenvectors().leftCols(keep);
    out.labels.assign(static_cast<std::size_t>(keep), StateLabel{});
    for (std::int64_t i = 0; i < keep; ++i) {
        StateLabel& lab = out.labels[static_cast<std::size_t>(i)];
        lab.s = s;
        lab.multiplicity = static_cast<int>(std::lround(2.0 * s + 1.0));
        lab.s2_expectation = out.vectors.col(i).dot(s2_.mat * out.vectors.col(i));
        lab.sz = basis_.spec().sz();
        if (std::abs(lab.s2_expectation - s * (s + 1.0)) > 1e-8)
            throw InternalError("solve_spin_block: lifted state drifted off its spin value");
        // Lifted vectors must be true eigenpairs of the full operator.
        const double res = (h.mat * out.vectors.col(i) - out.values[i] * out.vectors.col(i)).norm();
        if (res > 1e-9 * std::max(1.0, std::abs(out.values[i])))
            throw SolverError("solve_spin_block: residual contract violated after lifting");
    }
    return out;
}

Spectrum SpinBlockWorkspace::solve_lowest(const OperatorMatrix& h, int k) const {
    struct Entry {
        double value;
        double s;
        int index_in_block;
    };
    std::vector<Entry> entries;
    std::map<int, Spectrum> block_spectra;
    int key = 0;
    for (const auto& sector : total_.sectors()) {
        const int kk = std::min<std::int64_t>(k, static_cast<std::int64_t>(sector.basis.cols()));
        Spectrum sp = solve_spin_block(h, sector.s, kk);
        for (std::int64_t i = 0; i < sp.size(); ++i)
            entries.push_back(Entry{sp.values[i], sector.s, static_cast<int>(i)});
        block_spectra[key++] = std::move(sp);
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return a.value < b.value; });
    const std::int64_t keep = std::min<std::int64_t>(k, static_cast<std::int64_t>(entries.size()));

    Spectrum out;
    out.values.resize(keep);
    out.vectors.resize(static_cast<std::int64_t>(basis_.size()), keep);
    out.labels.resize(static_cast<std::size_t>(keep));
    for (std::int64_t i = 0; i < keep; ++i) {
        const Entry& e = entries[static_cast<std::size_t>(i)];
        int block_key = 0;
        for (const auto& sector : total_.sectors()) {
            if (std::abs(sector.s - e.s) < 1e-9) break;
            ++block_key;
        }
        const Spectrum& sp = block_spectra[block_key];
        out.values[i] = e.value;
        out.vectors.col(i) = sp.vectors.col(e.index_in_block);
        out.labels[static_cast<std::size_t>(i)] = sp.labels[static_cast<std::size_t>(e.index_in_block)];
    }
    return out;
}

SpinmerismWorkspace::SpinmerismWorkspace()
    : blocks(build_sector_basis(spinmerism_sector())),
      metal(build_projectors(blocks.basis(), metal_fragment())),
      ligand(build_projectors(blocks.basis(), ligand_fragment())) {}

// ---------------------------------------------------------------------------

std::string to_string(SweepParameter p) {
    switch (p) {
        case SweepParameter::dq: return "dq";
        case SweepParameter::k_ml: return "k_ml";
        case SweepParameter::t_ml: return "t_ml";
        case SweepParameter::eps_l: return "eps_l";
    }
    return "?";
}

SpinmerismParams with_parameter(SpinmerismParams params, SweepParameter vary, double value) {
    switch (vary) {
        case SweepParameter::dq: params.dq_cm1 = value; break;
        case SweepParameter::k_ml: params.k_ml_cm1 = value; break;
        case SweepParameter::t_ml: params.t_ml_cm1 = value; break;
        case SweepParameter::eps_l: params.eps_l_cm1 = value; break;
    }
    return params;
}

SweepPoint solve_spinmerism_point(const SpinmerismParams& params, SweepParameter vary,
                                  double value, const SpinmerismWorkspace& ws) {
    const IntegralSet ints = build_spinmerism(with_parameter(params, vary, value));
    const OperatorMatrix h = build_hamiltonian(ws.blocks.basis(), ints);

    double ground = std::numeric_limits<double>::infinity();
    for (double s : ws.blocks.spin_values())
        ground = std::min(ground, ws.blocks.solve_spin_block(h, s, 1).values[0]);

    const Spectrum quintets = ws.blocks.solve_spin_block(h, 2.0, 2);
    if (quintets.size() < 2)
        throw SolverError("solve_spinmerism_point: fewer than two S=2 states in the window");

    SweepPoint pt;
    pt.value = value;
    pt.q1.energy_cm1 = hartree_to_cm1(quintets.values[0] - ground);
    pt.q2.energy_cm1 = hartree_to_cm1(quintets.values[1] - ground);
    pt.q1.weights = joint_decompose(quintets.vectors.col(0), ws.metal, ws.ligand);
    pt.q2.weights = joint_decompose(quintets.vectors.col(1), ws.metal, ws.ligand);
    pt.gap_cm1 = pt.q2.energy_cm1 - pt.q1.energy_cm1;
    return pt;
}

namespace {

// Dominant doubled metal spin of a decomposition, folded over S_B and n_A.
int dominant_metal_spin(const JointWeights& w) {
    std::map<int, double> by_sa;
    for (const auto& [key, v] : w.by_spin()) by_sa[key.first] += v;
    int best_key = -1;
    double best = -1.0;
    for (const auto& [ka, v] : by_sa)
        if (v > best) {
            best = v;
            best_key = ka;
        }
    return best_key;
}

} // namespace

SpinmerismSweep sweep_spinmerism(const SpinmerismParams& params, SweepParameter vary, double lo,
                                 double hi, int points, const SpinmerismWorkspace& ws) {
    if (points < 2) throw ParameterError("sweep_spinmerism: at least two points required");
    if (!(hi > lo)) throw ParameterError("sweep_spinmerism: empty sweep range");

    SpinmerismSweep sweep;
    sweep.vary = vary;
    sweep.points.reserve(static_cast<std::size_t>(points));
    for (int i = 0; i < points; ++i) {
        const double value = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
        sweep.points.push_back(solve_spinmerism_point(params, vary, value, ws));
    }

    sweep.min_gap_index = 0;
    sweep.min_gap_cm1 = sweep.points[0].gap_cm1;
    for (std::size_t i = 1; i < sweep.points.size(); ++i)
        if (sweep.points[i].gap_cm1 < sweep.min_gap_cm1) {
            sweep.min_gap_cm1 = sweep.points[i].gap_cm1;
            sweep.min_gap_index = static_cast<int>(i);
        }

    for (std::size_t i = 1; i < sweep.points.size(); ++i) {
        const int before = dominant_metal_spin(sweep.points[i - 1].q1.weights);
        const int after = dominant_metal_spin(sweep.points[i].q1.weights);
        if (before != after) {
            sweep.weight_exchange_value =
                0.5 * (sweep.points[i - 1].value + sweep.points[i].value);
            break;
        }
    }
    return sweep;
}

// ---------------------------------------------------------------------------

IntegralSet build_heisenberg_dimer(double j_cm1) {
    IntegralSet ints(2);
    ints.set_two(0, 1, 1, 0, cm1_to_hartree(j_cm1));
    ints.set_two(0, 0, 0, 0, cm1_to_hartree(heisenberg_ionic_u_cm1));
    ints.set_two(1, 1, 1, 1, cm1_to_hartree(heisenberg_ionic_u_cm1));
    return ints;
}

HeisenbergFit fit_heisenberg(const Spectrum& labeled) {
    if (labeled.labels.empty())
        throw ParameterError("fit_heisenberg: spectrum must carry spin labels");

    // Lowest level per spin value.
    std::map<int, double> lowest; // doubled S -> energy (hartree)
    for (std::int64_t i = 0; i < labeled.size(); ++i) {
        const int key = static_cast<int>(std::lround(2.0 * labeled.labels[static_cast<std::size_t>(i)].s));
        auto it = lowest.find(key);
        if (it == lowest.end()) lowest.emplace(key, labeled.values[i]);
    }
    if (lowest.size() < 2)
        throw ParameterError("fit_heisenberg: need at least two distinct spin values");

    // Least squares for E(S) = c - J * S(S+1); exact for two levels.
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    const double n = static_cast<double>(lowest.size());
    for (const auto& [key, e] : lowest) {
        const double s = key / 2.0;
        const double x = s * (s + 1.0);
        const double y = hartree_to_cm1(e);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    const double c = (sy - slope * sx) / n;

    HeisenbergFit fit;
    fit.j_cm1 = -slope;
    fit.residual_cm1 = 0.0;
    for (const auto& [key, e] : lowest) {
        const double s = key / 2.0;
        const double pred = c + slope * s * (s + 1.0);
        fit.residual_cm1 = std::max(fit.residual_cm1, std::abs(hartree_to_cm1(e) - pred));
    }
    return fit;
}

} // namespace edspin
