#ifndef OSMOTIC_DYNAMICS_HPP
#define OSMOTIC_DYNAMICS_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <stdexcept>
#include <vector>

#include "osmotic/grid.hpp"
#include "osmotic/madelung.hpp"
#include "osmotic/params.hpp"
#include "osmotic/reports.hpp"
#include "osmotic/states.hpp"

namespace osmotic {

struct PdeConfig {
    double dt = 1e-3;
    double t_final = 0.0;
    FrequencyProfile profile = FrequencyProfile::constant(1.0);
    std::vector<double> snapshot_times;  // sorted, inside [0, t_final]
    double tail_mass_limit = 1e-12;
};

struct Snapshot {
    double t = 0.0;
    ComplexField psi;
};

namespace detail {

/// Complex banded LU with partial pivoting (LAPACK-style band storage),
/// bandwidth kl = ku = 2 for the five-point Crank-Nicolson operator.
class BandedLU {
  public:
    BandedLU(std::size_t n, int kl, int ku)
        : n_(n), kl_(kl), ku_(ku), ldab_(2 * kl + ku + 1), ab_(ldab_ * n, complexd{}),
          ipiv_(n, 0) {}

    complexd& at(std::size_t i, std::size_t j) {
        return ab_[(kl_ + ku_ + i - j) + j * ldab_];
    }

    void factor() {
        const int band = kl_ + ku_;
        for (std::size_t j = 0; j < n_; ++j) {
            const std::size_t imax = std::min(n_ - 1, j + static_cast<std::size_t>(kl_));
            std::size_t piv = j;
            double best = std::abs(at(j, j));
            for (std::size_t i = j + 1; i <= imax; ++i) {
                const double m = std::abs(at(i, j));
                if (m > best) { best = m; piv = i; }
            }
            if (best == 0.0) throw std::runtime_error("BandedLU: singular matrix");
            ipiv_[j] = static_cast<int>(piv);
            const std::size_t jmax = std::min(n_ - 1, j + static_cast<std::size_t>(band));
            if (piv != j)
                for (std::size_t k = j; k <= jmax; ++k) std::swap(at(j, k), at(piv, k));
            const complexd pivot = at(j, j);
            for (std::size_t i = j + 1; i <= imax; ++i) {
                const complexd l = at(i, j) / pivot;
                at(i, j) = l;
                for (std::size_t k = j + 1; k <= jmax; ++k) at(i, k) -= l * at(j, k);
            }
        }
    }

    void solve(std::vector<complexd>& b) const {
        const int band = kl_ + ku_;
        for (std::size_t j = 0; j < n_; ++j) {
            const auto piv = static_cast<std::size_t>(ipiv_[j]);
            if (piv != j) std::swap(b[j], b[piv]);
            const std::size_t imax = std::min(n_ - 1, j + static_cast<std::size_t>(kl_));
            for (std::size_t i = j + 1; i <= imax; ++i) b[i] -= cat(i, j) * b[j];
        }
        for (std::size_t j = n_; j-- > 0;) {
            const std::size_t kmax = std::min(n_ - 1, j + static_cast<std::size_t>(band));
            complexd acc = b[j];
            for (std::size_t k = j + 1; k <= kmax; ++k) acc -= cat(j, k) * b[k];
            b[j] = acc / cat(j, j);
        }
    }

  private:
    complexd cat(std::size_t i, std::size_t j) const {
        return ab_[(kl_ + ku_ + i - j) + j * ldab_];
    }

    std::size_t n_;
    int kl_, ku_;
    std::size_t ldab_;
    std::vector<complexd> ab_;
    std::vector<int> ipiv_;
};

// Five-point O(dx^4) symmetric Hamiltonian stencil: rows of
// H = -(hbar^2/2m) L5 + V, Dirichlet beyond the ends.
struct HamiltonianBand {
    std::vector<double> d0, d1, d2;  // diagonal, first, second off-diagonals

    HamiltonianBand(const Grid& g, const std::vector<double>& v, const PhysicalParams& p) {
        const double k = p.hbar * p.hbar / (2.0 * p.mass * 12.0 * g.dx * g.dx);
        d0.assign(g.n, 0.0);
        d1.assign(g.n, -16.0 * k);  // coupling (j, j+1)
        d2.assign(g.n, k);          // coupling (j, j+2)
        for (std::size_t j = 0; j < g.n; ++j) d0[j] = 30.0 * k + v[j];
    }

    void apply(const std::vector<complexd>& x, std::vector<complexd>& y) const {
        const std::size_t n = x.size();
        for (std::size_t j = 0; j < n; ++j) {
            complexd acc = d0[j] * x[j];
            if (j >= 1) acc += d1[j - 1] * x[j - 1];
            if (j + 1 < n) acc += d1[j] * x[j + 1];
            if (j >= 2) acc += d2[j - 2] * x[j - 2];
            if (j + 2 < n) acc += d2[j] * x[j + 2];
            y[j] = acc;
        }
    }
};

}  // namespace detail

/// Crank-Nicolson propagator for H = -(hbar^2/2m) d_xx + m omega(t)^2 x^2 / 2
/// with a five-point spatial stencil and zero Dirichlet boundaries.  The
/// Cayley form (I + i dt H/2hbar) psi' = (I - i dt H/2hbar) psi is exactly
/// unitary in the discrete norm, so norm drift is solver round-off only.
/// Returns snapshots at the requested times (time stepping lands exactly on
/// snapshot and quench-switch times).
inline std::vector<Snapshot> evolve_pde(const ComplexField& psi0, const PdeConfig& cfg,
                                        const PhysicalParams& p) {
    if (!(cfg.dt > 0.0)) throw std::invalid_argument("evolve_pde: dt must be positive");
    if (cfg.t_final < 0.0) throw std::invalid_argument("evolve_pde: t_final must be >= 0");
    const double n2 = norm_squared(psi0);
    if (std::abs(n2 - 1.0) > 1e-6) throw std::invalid_argument("evolve_pde: psi0 not normalized");

    const Grid& g = psi0.grid;
    std::vector<double> knots = cfg.profile.switch_times(0.0, cfg.t_final);
    for (double ts : cfg.snapshot_times) {
        if (ts < 0.0 || ts > cfg.t_final)
            throw std::invalid_argument("evolve_pde: snapshot time outside [0, t_final]");
        if (ts > 0.0 && ts < cfg.t_final) knots.push_back(ts);
    }
    knots.push_back(cfg.t_final);
    std::sort(knots.begin(), knots.end());
    knots.erase(std::unique(knots.begin(), knots.end()), knots.end());

    std::vector<Snapshot> out;
    auto want_snapshot = [&cfg](double t) {
        for (double ts : cfg.snapshot_times)
            if (std::abs(ts - t) < 1e-12) return true;
        return false;
    };

    std::vector<complexd> psi = psi0.values;
    std::vector<complexd> rhs(g.n);
    std::vector<double> v(g.n);
    double t = 0.0;
    if (want_snapshot(0.0)) out.push_back({0.0, psi0});

    auto check_state = [&](double tnow) {
        double edge = 0.0;
        for (std::size_t i = 0; i < 3; ++i)
            edge += (std::norm(psi[i]) + std::norm(psi[g.n - 1 - i])) * g.dx;
        if (edge > cfg.tail_mass_limit)
            throw std::runtime_error("evolve_pde: boundary tail mass breached at t = " +
                                     std::to_string(tnow));
        for (const auto& c : psi)
            if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
                throw std::runtime_error("evolve_pde: non-finite state");
    };

    for (double knot : knots) {
        const double seg = knot - t;
        if (seg > 0.0) {
            const auto steps = static_cast<std::size_t>(std::ceil(seg / cfg.dt - 1e-12));
            const double h = seg / static_cast<double>(steps);
            double omega_cached = -1.0;
            detail::BandedLU lu(g.n, 2, 2);
            detail::HamiltonianBand hb(g, v, p);
            for (std::size_t k = 0; k < steps; ++k) {
                const double tm = t + (static_cast<double>(k) + 0.5) * h;
                const double om = cfg.profile.omega(tm);
                if (!(om > 0.0)) throw std::runtime_error("evolve_pde: omega(t) <= 0");
                if (om != omega_cached) {
                    omega_cached = om;
                    for (std::size_t i = 0; i < g.n; ++i) {
                        const double x = g.x(i);
                        v[i] = 0.5 * p.mass * om * om * x * x;
                    }
                    hb = detail::HamiltonianBand(g, v, p);
                    lu = detail::BandedLU(g.n, 2, 2);
                    const complexd itheta(0.0, h / (2.0 * p.hbar));
                    for (std::size_t j = 0; j < g.n; ++j) {
                        lu.at(j, j) = 1.0 + itheta * hb.d0[j];
                        if (j + 1 < g.n) {
                            lu.at(j, j + 1) = itheta * hb.d1[j];
                            lu.at(j + 1, j) = itheta * hb.d1[j];
                        }
                        if (j + 2 < g.n) {
                            lu.at(j, j + 2) = itheta * hb.d2[j];
                            lu.at(j + 2, j) = itheta * hb.d2[j];
                        }
                    }
                    lu.factor();
                }
                hb.apply(psi, rhs);
                const complexd itheta(0.0, h / (2.0 * p.hbar));
                for (std::size_t j = 0; j < g.n; ++j) rhs[j] = psi[j] - itheta * rhs[j];
                lu.solve(rhs);
                psi.swap(rhs);
            }
            t = knot;
        }
        check_state(t);
        if (want_snapshot(t) && t > 0.0) out.push_back({t, ComplexField(g, psi)});
    }
    return out;
}

/// Fidelity |<a|b>| and the L2 distance after optimal global phase alignment.
struct StateDistance {
    double l2_error_mod_phase = 0.0;
    double fidelity = 0.0;
};

inline StateDistance compare_states(const ComplexField& a, const ComplexField& b) {
    if (!(a.grid == b.grid)) throw std::invalid_argument("compare_states: grid mismatch");
    const complexd c = inner_product(a, b);
    const double na = norm_squared(a), nb = norm_squared(b);
    StateDistance d;
    d.fidelity = std::abs(c);
    d.l2_error_mod_phase = std::sqrt(std::max(0.0, na + nb - 2.0 * std::abs(c)));
    return d;
}

/// Three phase-coherent snapshots around t0 for centered time differences.
struct SnapshotTriple {
    ComplexField psi_minus, psi_center, psi_plus;
    double t0 = 0.0;
    double delta = 0.0;
};

namespace detail {

// Removes branch flips (multiples of pi in the global phase) between
// neighbouring snapshots; the small physical phase drift is kept.
inline ComplexField align_mod_pi(const ComplexField& ref, const ComplexField& s) {
    const double theta = std::arg(inner_product(ref, s));
    const double k = std::round(theta / M_PI);
    if (k == 0.0) return s;
    ComplexField out = s;
    const complexd rot = std::exp(complexd(0.0, -M_PI * k));
    for (auto& cv : out.values) cv *= rot;
    return out;
}

struct ResidualContext {
    MadelungFields mf;
    RealField drho_t;
    RealField ds_t;   // time derivative of the full phase S
    RealField v;      // external potential at t0
    std::vector<char> core;  // mask eroded away from the tail edges
};

inline ResidualContext residual_context(const SnapshotTriple& snap, const FrequencyProfile& w,
                                        const PhysicalParams& p, double rho_floor) {
    if (!(snap.delta > 0.0)) throw std::invalid_argument("residuals: delta must be positive");
    const ComplexField psi_m = align_mod_pi(snap.psi_center, snap.psi_minus);
    const ComplexField psi_p = align_mod_pi(snap.psi_center, snap.psi_plus);

    ResidualContext ctx;
    ctx.mf = decompose(snap.psi_center, p, rho_floor);
    const MadelungFields mf_m = decompose(psi_m, p, rho_floor);
    const MadelungFields mf_p = decompose(psi_p, p, rho_floor);
    const RealField& rho_m = mf_m.rho;
    const RealField& rho_p = mf_p.rho;

    const Grid& g = snap.psi_center.grid;

    // dS/dt by differencing the phase fields of the aligned snapshots, not
    // the rotating complex exponentials: the latter would inject a
    // (delta^2/6)(dS/dt)^3 truncation error that grows like x^6.  The
    // integration constant of each reconstructed S is re-anchored to the
    // actual phase drift at the density peak.
    std::size_t anchor = 0;
    for (std::size_t i = 1; i < g.n; ++i)
        if (ctx.mf.rho.values[i] > ctx.mf.rho.values[anchor]) anchor = i;
    auto anchored_offset = [&](const ComplexField& psi_s, const MadelungFields& mf_s) {
        const double drift = std::arg(psi_s.values[anchor] *
                                      std::conj(snap.psi_center.values[anchor]));
        return p.hbar * drift - (mf_s.s.values[anchor] - ctx.mf.s.values[anchor]);
    };
    const double c_m = anchored_offset(psi_m, mf_m);
    const double c_p = anchored_offset(psi_p, mf_p);

    ctx.drho_t = RealField(g);
    ctx.ds_t = RealField(g);
    ctx.v = RealField(g);
    const double om = w.omega(snap.t0);
    for (std::size_t i = 0; i < g.n; ++i) {
        ctx.drho_t.values[i] = (rho_p.values[i] - rho_m.values[i]) / (2.0 * snap.delta);
        if (ctx.mf.mask[i])
            ctx.ds_t.values[i] = ((mf_p.s.values[i] + c_p) - (mf_m.s.values[i] + c_m)) /
                                 (2.0 * snap.delta);
        const double x = g.x(i);
        ctx.v.values[i] = 0.5 * p.mass * om * om * x * x;
    }

    // Erode four points off each end of the unmasked interval so the wide
    // stencils never touch the zero-filled tails.
    ctx.core.assign(g.n, 0);
    const std::size_t lo = ctx.mf.first_unmasked(), hi = ctx.mf.last_unmasked();
    if (hi >= lo + 8)
        for (std::size_t i = lo + 4; i <= hi - 4; ++i) ctx.core[i] = 1;

    double core_mass = 0.0;
    RealField rr(g);
    for (std::size_t i = 0; i < g.n; ++i) rr.values[i] = ctx.core[i] ? ctx.mf.rho.values[i] : 0.0;
    core_mass = integrate(rr);
    if (core_mass < 0.5)
        throw std::runtime_error("residuals: masked region covers over half the probability mass");
    return ctx;
}

inline double rms(const RealField& f, const std::vector<char>& sel) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (sel[i]) { acc += f.values[i] * f.values[i]; ++cnt; }
    return cnt ? std::sqrt(acc / static_cast<double>(cnt)) : 0.0;
}

inline double mean_over(const RealField& f, const std::vector<char>& sel) {
    double acc = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < f.size(); ++i)
        if (sel[i]) { acc += f.values[i]; ++cnt; }
    return cnt ? acc / static_cast<double>(cnt) : 0.0;
}

}  // namespace detail

/// RMS residuals of the continuity and Hamilton-Jacobi-Madelung equations
/// on centered differences of the three snapshots.
inline ResidualReport bohm_residuals(const SnapshotTriple& snap, const FrequencyProfile& w,
                                     const PhysicalParams& p,
                                     double rho_floor = kDefaultRhoFloor) {
    auto ctx = detail::residual_context(snap, w, p, rho_floor);
    const Grid& g = snap.psi_center.grid;

    RealField flux(g);
    for (std::size_t i = 0; i < g.n; ++i)
        flux.values[i] = ctx.mf.rho.values[i] * ctx.mf.p_c.values[i];
    const RealField dflux = derivative6(flux);

    RealField cont(g), hjm(g);
    for (std::size_t i = 0; i < g.n; ++i) {
        if (!ctx.core[i]) continue;
        cont.values[i] = ctx.drho_t.values[i] + dflux.values[i] / p.mass;
        const double pc = ctx.mf.p_c.values[i];
        hjm.values[i] = ctx.ds_t.values[i] + pc * pc / (2.0 * p.mass) + ctx.v.values[i] +
                        ctx.mf.v_q.values[i];
    }

    ResidualReport rep;
    rep.continuity_rms = detail::rms(cont, ctx.core);
    rep.hjm_rms_raw = detail::rms(hjm, ctx.core);
    const double hm = detail::mean_over(hjm, ctx.core);
    RealField centered(g);
    for (std::size_t i = 0; i < g.n; ++i)
        if (ctx.core[i]) centered.values[i] = hjm.values[i] - hm;
    rep.hjm_rms = detail::rms(centered, ctx.core);
    rep.excluded_mass = ctx.mf.excluded_mass;
    return rep;
}

/// Residuals of the variational extremal system in the (rho, S_minus)
/// variables, S_minus = S - S_s with S_s = (hbar/2) ln(l rho).  Solutions
/// of the Bohm pair satisfy these equations; the check differentiates
/// S_minus independently rather than reusing the continuity arrays.
inline ResidualReport extremal_residuals(const SnapshotTriple& snap, const FrequencyProfile& w,
                                         const PhysicalParams& p,
                                         double rho_floor = kDefaultRhoFloor) {
    auto ctx = detail::residual_context(snap, w, p, rho_floor);
    const Grid& g = snap.psi_center.grid;
    const double lam = 0.5 * p.hbar;
    const double l = p.length_scale();
    const std::size_t n = g.n;

    // S_minus = S - (hbar/2) ln(l rho); finite well past the mask edge, the
    // deep-tail garbage never enters the eroded core.
    RealField s_minus(g);
    for (std::size_t i = 0; i < n; ++i) {
        const double lr = std::max(l * ctx.mf.rho.values[i], 1e-300);
        s_minus.values[i] = ctx.mf.s.values[i] - lam * std::log(lr);
    }
    const RealField ds_minus = derivative6(s_minus);
    const RealField d2s_minus = second_derivative6(s_minus);
    const RealField drho = derivative6(ctx.mf.rho);
    const RealField d2rho = second_derivative6(ctx.mf.rho);

    RealField flux(g);
    for (std::size_t i = 0; i < n; ++i)
        flux.values[i] = ctx.mf.rho.values[i] * ds_minus.values[i] + lam * drho.values[i];
    const RealField dflux = derivative6(flux);

    RealField e1(g), e2(g);
    for (std::size_t i = 0; i < n; ++i) {
        if (!ctx.core[i]) continue;
        const double rho = ctx.mf.rho.values[i];
        const double ds_s_t = lam * ctx.drho_t.values[i] / rho;
        const double dsm_t = ctx.ds_t.values[i] - ds_s_t;
        const double grad_s = ds_minus.values[i] + lam * drho.values[i] / rho;

        e1.values[i] = ctx.drho_t.values[i] + dflux.values[i] / p.mass;
        e2.values[i] = dsm_t + grad_s * grad_s / (2.0 * p.mass) + ctx.v.values[i] +
                       ctx.mf.v_q.values[i] -
                       (lam / p.mass) *
                           (drho.values[i] * ds_minus.values[i] / rho + d2s_minus.values[i]) -
                       (lam * lam / p.mass) * d2rho.values[i] / rho;
    }

    ResidualReport rep;
    rep.extremal1_rms = detail::rms(e1, ctx.core);
    rep.extremal2_rms_raw = detail::rms(e2, ctx.core);
    const double em = detail::mean_over(e2, ctx.core);
    RealField centered(g);
    for (std::size_t i = 0; i < n; ++i)
        if (ctx.core[i]) centered.values[i] = e2.values[i] - em;
    rep.extremal2_rms = detail::rms(centered, ctx.core);
    rep.excluded_mass = ctx.mf.excluded_mass;
    return rep;
}

/// <H> at a frozen time, for energy-conservation checks.
inline double mean_energy(const ComplexField& psi, double omega, const PhysicalParams& p) {
    const ComplexField dpsi = derivative6(psi);
    RealField e(psi.grid);
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double x = psi.grid.x(i);
        e.values[i] = (p.hbar * p.hbar / (2.0 * p.mass)) * std::norm(dpsi.values[i]) +
                      0.5 * p.mass * omega * omega * x * x * std::norm(psi.values[i]);
    }
    return integrate(e);
}

}  // namespace osmotic

#endif
