#ifndef OSMOTIC_MOMENTS_HPP
#define OSMOTIC_MOMENTS_HPP

#include <cmath>
#include <stdexcept>
#include <string>

#include "osmotic/grid.hpp"
#include "osmotic/madelung.hpp"
#include "osmotic/params.hpp"
#include "osmotic/reports.hpp"

namespace osmotic {

inline constexpr double kTailMassErrorLevel = 1e-6;

namespace detail {

inline double expect(const MadelungFields& mf, const std::vector<double>& weight) {
    RealField f(mf.grid);
    for (std::size_t i = 0; i < mf.grid.n; ++i)
        f.values[i] = mf.mask[i] ? mf.rho.values[i] * weight[i] : 0.0;
    return integrate(f);
}

// Probability the grid cannot see: exponential-decay extrapolation of the
// density beyond each endpoint, rho_edge * (rho/|rho'|)_edge.
inline double off_grid_tail_estimate(const RealField& rho) {
    const std::size_t n = rho.size();
    const double dx = rho.grid.dx;
    const double width = rho.grid.x_max - rho.grid.x_min;
    auto side = [&](double r_edge, double r_next) {
        if (!(r_edge > 0.0)) return 0.0;
        const double slope = std::abs(r_next - r_edge) / dx;
        const double scale = (slope > 0.0) ? std::min(r_edge / slope, width) : width;
        return r_edge * scale;
    };
    return side(rho.values[0], rho.values[1]) + side(rho.values[n - 1], rho.values[n - 2]);
}

}  // namespace detail

/// Stochastic moments by quadrature against rho, quantum moments from psi
/// directly.  The Fisher information uses the same rho' samples as p_s so
/// the exact relation delta_x^2 * var_ps = hbar^2/4 holds structurally.
inline MomentReport grid_moments(const MadelungFields& mf, const ComplexField& psi,
                                 const PhysicalParams& p) {
    if (!(psi.grid == mf.grid)) throw std::invalid_argument("grid_moments: grid mismatch");
    if (mf.excluded_mass + detail::off_grid_tail_estimate(mf.rho) > kTailMassErrorLevel)
        throw std::runtime_error("grid_moments: unresolved tail mass exceeds 1e-6");

    const std::size_t n = mf.grid.n;
    std::vector<double> x(n), pc(n), ps(n), pt(n);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = mf.grid.x(i);
        pc[i] = mf.p_c.values[i];
        ps[i] = mf.p_s.values[i];
        pt[i] = pc[i] + ps[i];
    }
    auto mul = [&n](const std::vector<double>& a, const std::vector<double>& b) {
        std::vector<double> out(n);
        for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
        return out;
    };

    MomentReport m;
    const double xb = detail::expect(mf, x);
    const double pcb = detail::expect(mf, pc);
    const double psb = detail::expect(mf, ps);
    const double pb = pcb + psb;
    m.mean_x = xb;
    m.mean_p = pb;
    m.var_x = detail::expect(mf, mul(x, x)) - xb * xb;
    m.var_pc = detail::expect(mf, mul(pc, pc)) - pcb * pcb;
    m.var_ps = detail::expect(mf, mul(ps, ps)) - psb * psb;
    m.var_p = detail::expect(mf, mul(pt, pt)) - pb * pb;
    m.cov_x_pc = detail::expect(mf, mul(x, pc)) - xb * pcb;
    m.cov_x_ps = detail::expect(mf, mul(x, ps)) - xb * psb;
    m.cov_x_p = detail::expect(mf, mul(x, pt)) - xb * pb;
    m.cov_pc_ps = detail::expect(mf, mul(pc, ps)) - pcb * psb;
    m.mean_ps_cubed = detail::expect(mf, mul(ps, mul(ps, ps)));

    // Quantum moments: <p^2> via |hbar psi'|^2, manifestly nonnegative.
    const ComplexField dpsi = derivative6(psi);
    RealField im_psid(psi.grid), abs_d(psi.grid), x_im(psi.grid);
    for (std::size_t i = 0; i < n; ++i) {
        const double im = std::imag(std::conj(psi.values[i]) * dpsi.values[i]);
        im_psid.values[i] = p.hbar * im;
        abs_d.values[i] = std::norm(dpsi.values[i]) * p.hbar * p.hbar;
        x_im.values[i] = x[i] * p.hbar * im;
    }
    const double q_mean_p = integrate(im_psid);
    m.q_var_x = m.var_x;
    m.q_var_p = integrate(abs_d) - q_mean_p * q_mean_p;
    m.q_cov_xp = integrate(x_im) - xb * q_mean_p;

    // Fisher information from the identical (rho'/rho) samples behind p_s.
    RealField fi(mf.grid);
    for (std::size_t i = 0; i < n; ++i)
        fi.values[i] = mf.mask[i]
                           ? mf.rho.values[i] * (2.0 * ps[i] / p.hbar) * (2.0 * ps[i] / p.hbar)
                           : 0.0;
    m.fisher_info = integrate(fi);
    m.fisher_length_sq = 1.0 / m.fisher_info;
    return m;
}

/// (q_var_p - var_p) / q_var_p.
inline double r_p_from_moments(const MomentReport& m) {
    if (!(m.q_var_p > 0.0)) throw std::invalid_argument("r_p_from_moments: q_var_p must be positive");
    return (m.q_var_p - m.var_p) / m.q_var_p;
}

/// Evaluates every uncertainty relation of the x/p family.  `tol` is the
/// relative saturation tolerance; gaps of asserted relations below -tol
/// signal a violation.
inline URReport ur_report(const MomentReport& m, const PhysicalParams& p, double tol = 1e-6) {
    const double h24 = p.hbar * p.hbar / 4.0;
    const double l2 = p.hbar / (p.mass * p.omega0);  // l^2

    URReport rep;
    rep.tolerance = tol;
    auto add = [&rep, tol](const std::string& name, double lhs, double rhs, double natural,
                           bool asserted) {
        URRecord r;
        r.name = name;
        r.lhs = lhs;
        r.rhs = rhs;
        r.gap = lhs - rhs;
        const double scale = std::max({std::abs(lhs), std::abs(rhs), natural});
        r.saturated = std::abs(r.gap) <= tol * scale;
        r.asserted = asserted;
        rep.relations.push_back(r);
    };

    add("RS_x_pc", m.var_x * m.var_pc, m.cov_x_pc * m.cov_x_pc, h24 * h24, true);
    add("RS_x_ps", m.var_x * m.var_ps, m.cov_x_ps * m.cov_x_ps, h24 * h24, true);
    add("RS_x_p", m.var_x * m.var_p, m.cov_x_p * m.cov_x_p, h24 * h24, true);
    add("RS_pc_ps", m.var_pc * m.var_ps, m.cov_pc_ps * m.cov_pc_ps, h24 * h24, true);
    add("osmotic", m.var_x * m.var_ps, h24, h24, true);
    add("cramer_rao", m.var_x * m.fisher_info, 1.0, 1.0, true);
    add("exact_ps", m.fisher_length_sq * m.var_ps, h24, h24, true);
    add("chain", m.q_var_x * m.q_var_p, m.var_x * m.var_ps, h24, true);
    add("quantum_RS", m.q_var_x * m.q_var_p - m.q_cov_xp * m.q_cov_xp, h24, h24, true);

    const double sx = m.q_var_x / l2;
    const double sp = m.q_var_p * l2 / (p.hbar * p.hbar);
    add("sum_quantum", sx + sp, 1.0, 1.0, true);
    const double ssx = m.var_x / l2;
    const double ssp = m.var_p * l2 / (p.hbar * p.hbar);
    // The stochastic sum may legitimately drop below 1 in squeezed states.
    add("sum_stochastic", ssx + ssp, 1.0, 1.0, false);
    return rep;
}

}  // namespace osmotic

#endif
