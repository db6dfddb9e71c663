#ifndef OSMOTIC_MADELUNG_HPP
#define OSMOTIC_MADELUNG_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "osmotic/grid.hpp"
#include "osmotic/params.hpp"

namespace osmotic {

inline constexpr double kDefaultRhoFloor = 1e-12;

/// (rho, S, p_c, p_s, V_q) decomposition of a wave function.  Momentum
/// fields are zeroed where rho < rho_floor * max(rho); the mask and the
/// excluded probability mass are recorded.  S carries the convention
/// S(x_mid) = 0.
struct MadelungFields {
    Grid grid;
    RealField rho;
    RealField s;       // phase potential, p_c = dS/dx
    RealField p_c;
    RealField p_s;
    RealField v_q;
    std::vector<char> mask;  // 1 = usable, 0 = tail
    double excluded_mass = 0.0;
    double rho_floor = kDefaultRhoFloor;

    std::size_t first_unmasked() const {
        for (std::size_t i = 0; i < mask.size(); ++i)
            if (mask[i]) return i;
        return mask.size();
    }
    std::size_t last_unmasked() const {
        for (std::size_t i = mask.size(); i-- > 0;)
            if (mask[i]) return i;
        return mask.size();
    }
};

namespace detail {

inline std::vector<char> tail_mask(const RealField& rho, double floor_rel) {
    const double peak = *std::max_element(rho.values.begin(), rho.values.end());
    const double floor_abs = floor_rel * peak;
    std::vector<char> mask(rho.size(), 0);
    for (std::size_t i = 0; i < rho.size(); ++i) mask[i] = rho.values[i] >= floor_abs ? 1 : 0;
    // The usable region must be one contiguous interval; a gap means an
    // interior node, which the Gaussian family never has.
    std::size_t lo = mask.size(), hi = 0;
    for (std::size_t i = 0; i < mask.size(); ++i)
        if (mask[i]) { lo = std::min(lo, i); hi = std::max(hi, i); }
    if (lo == mask.size()) throw std::runtime_error("density is entirely below the floor");
    for (std::size_t i = lo; i <= hi; ++i)
        if (!mask[i]) throw std::invalid_argument("density has an interior node; state rejected");
    return mask;
}

// A node between grid points never dips below the floor, but it does show
// as a deep local minimum relative to the density on both sides.
inline void reject_interior_nodes(const RealField& rho, const std::vector<char>& mask) {
    const std::size_t n = rho.size();
    std::vector<double> left(n, 0.0), right(n, 0.0);
    double run = 0.0;
    for (std::size_t i = 0; i < n; ++i) { run = std::max(run, rho.values[i]); left[i] = run; }
    run = 0.0;
    for (std::size_t i = n; i-- > 0;) { run = std::max(run, rho.values[i]); right[i] = run; }
    constexpr double kNodeDip = 1e-4;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!mask[i]) continue;
        if (rho.values[i] < kNodeDip * std::min(left[i - 1], right[i + 1]))
            throw std::invalid_argument("density has an interior node; state rejected");
    }
}

inline double masked_mass(const RealField& rho, const std::vector<char>& mask) {
    RealField tails(rho.grid);
    for (std::size_t i = 0; i < rho.size(); ++i)
        tails.values[i] = mask[i] ? 0.0 : rho.values[i];
    return integrate(tails);
}

}  // namespace detail

/// V_q = hbar^2/(8m) [ (rho'/rho)^2 - 2 rho''/rho ] on the unmasked region.
inline RealField quantum_potential(const RealField& rho, const PhysicalParams& p,
                                   double rho_floor = kDefaultRhoFloor) {
    check_finite(rho, "quantum_potential");
    const auto mask = detail::tail_mask(rho, rho_floor);
    const RealField d1 = derivative6(rho);
    const RealField d2 = second_derivative6(rho);
    RealField vq(rho.grid);
    const double c = p.hbar * p.hbar / (8.0 * p.mass);
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (!mask[i]) continue;
        const double g = d1.values[i] / rho.values[i];
        vq.values[i] = c * (g * g - 2.0 * d2.values[i] / rho.values[i]);
    }
    return vq;
}

/// Splits psi into (rho, S, p_c, p_s, V_q).  p_c comes from
/// hbar*Im(psi* psi')/rho, which is immune to phase wrapping; S is the
/// cumulative integral of p_c anchored at the grid midpoint.
inline MadelungFields decompose(const ComplexField& psi, const PhysicalParams& p,
                                double rho_floor = kDefaultRhoFloor) {
    check_finite(psi, "decompose");
    if (!(rho_floor >= 1e-300 && rho_floor <= 1e-6))
        throw std::invalid_argument("decompose: rho_floor out of [1e-300, 1e-6]");

    MadelungFields mf;
    mf.grid = psi.grid;
    mf.rho_floor = rho_floor;
    mf.rho = abs_squared(psi);

    const double total = integrate(mf.rho);
    if (std::abs(total - 1.0) > 1e-6)
        throw std::invalid_argument("decompose: psi is not normalized");

    mf.mask = detail::tail_mask(mf.rho, rho_floor);
    detail::reject_interior_nodes(mf.rho, mf.mask);
    mf.excluded_mass = detail::masked_mass(mf.rho, mf.mask);

    const ComplexField dpsi = derivative6(psi);
    const RealField drho = derivative6(mf.rho);

    mf.p_c = RealField(psi.grid);
    mf.p_s = RealField(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        if (!mf.mask[i]) continue;
        mf.p_c.values[i] =
            p.hbar * std::imag(std::conj(psi.values[i]) * dpsi.values[i]) / mf.rho.values[i];
        mf.p_s.values[i] = 0.5 * p.hbar * drho.values[i] / mf.rho.values[i];
    }

    mf.s = cumulative_from_mid(mf.p_c);
    mf.v_q = quantum_potential(mf.rho, p, rho_floor);
    return mf;
}

/// psi = sqrt(rho) exp(i S / hbar).  Inverse of decompose up to the masked
/// tails and the additive constant of S.
inline ComplexField reconstruct_psi(const MadelungFields& mf, const PhysicalParams& p) {
    ComplexField psi(mf.grid);
    for (std::size_t i = 0; i < mf.grid.n; ++i) {
        const double r = mf.rho.values[i];
        if (r < 0.0) throw std::invalid_argument("reconstruct_psi: negative density");
        psi.values[i] = std::sqrt(r) * std::exp(complexd(0.0, mf.s.values[i] / p.hbar));
    }
    return psi;
}

}  // namespace osmotic

#endif
