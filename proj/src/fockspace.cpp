#include "edspin/fockspace.hpp"

#include <algorithm>

#include "edspin/errors.hpp"

namespace edspin {

namespace {

// Largest sector we agree to enumerate; far above desk scale (norb <= 12).
constexpr std::size_t max_sector_dimension = 30'000'000;

// All norb-bit words with k bits set, ascending as unsigned integers.
std::vector<std::uint32_t> combinations(int norb, int k) {
    std::vector<std::uint32_t> out;
    out.reserve(static_cast<std::size_t>(binomial(norb, k)));
    if (k == 0) {
        out.push_back(0);
        return out;
    }
    std::uint32_t v = (k == 32) ? ~0u : ((1u << k) - 1u);
    const std::uint32_t limit = (norb == 32) ? ~0u : ((1u << norb) - 1u);
    while (true) {
        out.push_back(v);
        if (v == (limit & ~((1u << (norb - k)) - 1u))) break; // highest combination
        // Gosper's hack: next integer with the same popcount.
        std::uint32_t t = v | (v - 1);
        v = (t + 1) | (((~t & (t + 1)) - 1) >> (std::countr_zero(v) + 1));
    }
    return out;
}

int parity_below(std::uint32_t bits, int orb) {
    const std::uint32_t below = (orb == 0) ? 0u : (bits & ((1u << orb) - 1u));
    return (std::popcount(below) & 1) ? -1 : 1;
}

} // namespace

std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        r = r * static_cast<std::uint64_t>(n - k + i) / static_cast<std::uint64_t>(i);
    }
    return r;
}

void SectorSpec::validate() const {
    if (norb < 0 || norb > max_orbitals)
        throw ParameterError("SectorSpec: norb must lie in [0, 32], got " + std::to_string(norb));
    if (nalpha < 0 || nalpha > norb || nbeta < 0 || nbeta > norb)
        throw ParameterError("SectorSpec: electron counts must lie in [0, norb]");
}

std::size_t SectorSpec::dimension() const {
    validate();
    return static_cast<std::size_t>(binomial(norb, nalpha)) *
           static_cast<std::size_t>(binomial(norb, nbeta));
}

void SectorBasis::build_index() {
    index_.clear();
    index_.reserve(dets_.size() * 2);
    for (std::size_t i = 0; i < dets_.size(); ++i) index_.emplace(dets_[i], static_cast<std::int64_t>(i));
}

SectorBasis SectorBasis::full(const SectorSpec& spec) {
    spec.validate();
    const std::size_t dim = spec.dimension();
    if (dim > max_sector_dimension)
        throw ParameterError("SectorBasis: sector dimension " + std::to_string(dim) +
                             " exceeds the enumeration cap");

    SectorBasis b;
    b.spec_ = spec;
    b.dets_.reserve(dim);
    const auto alphas = combinations(spec.norb, spec.nalpha);
    const auto betas = combinations(spec.norb, spec.nbeta);
    for (std::uint32_t a : alphas)
        for (std::uint32_t be : betas) b.dets_.push_back(Determinant{a, be});
    b.build_index();
    return b;
}

SectorBasis SectorBasis::from_determinants(const SectorSpec& spec, std::vector<Determinant> dets) {
    spec.validate();
    const std::uint32_t limit = (spec.norb == 32) ? ~0u : ((1u << spec.norb) - 1u);
    for (const auto& d : dets) {
        if ((d.alpha & ~limit) || (d.beta & ~limit))
            throw ParameterError("SectorBasis: determinant has bits above norb");
        if (d.n_alpha() != spec.nalpha || d.n_beta() != spec.nbeta)
            throw ParameterError("SectorBasis: determinant electron counts do not match sector");
    }
    std::sort(dets.begin(), dets.end());
    dets.erase(std::unique(dets.begin(), dets.end()), dets.end());

    SectorBasis b;
    b.spec_ = spec;
    b.dets_ = std::move(dets);
    b.build_index();
    return b;
}

SectorBasis build_sector_basis(const SectorSpec& spec) { return SectorBasis::full(spec); }

std::optional<ExcitationResult> apply_create(const Determinant& d, int orb, Spin s) {
    if (d.occupied(orb, s)) return std::nullopt;
    Determinant out = d;
    out.channel(s) |= (1u << orb);
    int phase = parity_below(d.channel(s), orb);
    // Down-spin positions sit after every up-spin orbital.
    if (s == Spin::down && (d.n_alpha() & 1)) phase = -phase;
    return ExcitationResult{out, phase};
}

std::optional<ExcitationResult> apply_annihilate(const Determinant& d, int orb, Spin s) {
    if (!d.occupied(orb, s)) return std::nullopt;
    Determinant out = d;
    out.channel(s) &= ~(1u << orb);
    int phase = parity_below(d.channel(s), orb);
    if (s == Spin::down && (d.n_alpha() & 1)) phase = -phase;
    return ExcitationResult{out, phase};
}

std::optional<ExcitationResult> apply_excitation(const Determinant& d, int p, int q, Spin s) {
    const auto killed = apply_annihilate(d, q, s);
    if (!killed) return std::nullopt;
    const auto raised = apply_create(killed->det, p, s);
    if (!raised) return std::nullopt;
    return ExcitationResult{raised->det, killed->phase * raised->phase};
}

std::vector<int> occupied_orbitals(std::uint32_t bits) {
    std::vector<int> occ;
    occ.reserve(std::popcount(bits));
    while (bits) {
        occ.push_back(std::countr_zero(bits));
        bits &= bits - 1;
    }
    return occ;
}

std::string bits_to_string(std::uint32_t bits, int norb) {
    std::string s(static_cast<std::size_t>(norb), '0');
    for (int p = 0; p < norb; ++p)
        if ((bits >> p) & 1u) s[static_cast<std::size_t>(p)] = '1';
    return s;
}

Determinant make_determinant(const std::vector<int>& alpha_occ, const std::vector<int>& beta_occ) {
    Determinant d;
    for (int p : alpha_occ) {
        if (p < 0 || p >= max_orbitals) throw ParameterError("make_determinant: orbital out of range");
        d.alpha |= (1u << p);
    }
    for (int p : beta_occ) {
        if (p < 0 || p >= max_orbitals) throw ParameterError("make_determinant: orbital out of range");
        d.beta |= (1u << p);
    }
    return d;
}

} // namespace edspin
