#ifndef OSMOTIC_STATES_HPP
#define OSMOTIC_STATES_HPP

#include <cmath>
#include <complex>
#include <functional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "osmotic/grid.hpp"
#include "osmotic/params.hpp"
#include "osmotic/reports.hpp"

namespace osmotic {

inline constexpr double kMuNuConstraintTol = 1e-9;

/// Eigenstate parameters of mu*x/l + i*nu*l*p/hbar.  Coherent states are
/// the special case mu = nu = 1/sqrt(2).  The admissibility constraint is
/// 2*Re(conj(mu)*nu) = 1; it is preserved by the epsilon evolution.
struct SqueezedStateParams {
    complexd alpha{0.0, 0.0};
    complexd mu{0.0, 0.0};
    complexd nu{0.0, 0.0};
    PhysicalParams params;

    double constraint_defect() const {
        return 2.0 * std::real(std::conj(mu) * nu) - 1.0;
    }
};

inline void require_constraint(const SqueezedStateParams& sp, double tol = kMuNuConstraintTol) {
    if (std::abs(sp.constraint_defect()) > tol)
        throw std::invalid_argument("squeezed-state params violate 2Re(mu* nu) = 1");
    if (std::abs(sp.nu) == 0.0)
        throw std::invalid_argument("squeezed-state params require nu != 0");
}

inline SqueezedStateParams coherent_params(complexd alpha, const PhysicalParams& p) {
    SqueezedStateParams sp;
    sp.alpha = alpha;
    sp.mu = complexd(1.0 / std::sqrt(2.0), 0.0);
    sp.nu = sp.mu;
    sp.params = p;
    return sp;
}

/// Squeeze factor r: mu = e^r/sqrt(2), nu = e^{-r}/sqrt(2).  r = 0 is the
/// coherent state; positive r squeezes the coordinate.
inline SqueezedStateParams squeeze_params(double r, complexd alpha, const PhysicalParams& p) {
    if (!std::isfinite(r)) throw std::invalid_argument("squeeze_params: non-finite r");
    SqueezedStateParams sp;
    sp.alpha = alpha;
    sp.mu = complexd(std::exp(r) / std::sqrt(2.0), 0.0);
    sp.nu = complexd(std::exp(-r) / std::sqrt(2.0), 0.0);
    sp.params = p;
    return sp;
}

inline SqueezedStateParams make_params(complexd mu, complexd nu, complexd alpha,
                                       const PhysicalParams& p,
                                       double tol = kMuNuConstraintTol) {
    SqueezedStateParams sp;
    sp.alpha = alpha;
    sp.mu = mu;
    sp.nu = nu;
    sp.params = p;
    require_constraint(sp, tol);
    return sp;
}

/// Classical-oscillator auxiliary variable driving the (mu, nu) evolution:
/// eps'' + omega(t)^2 eps = 0 with mu = -i eps_dot/sqrt(2 omega0),
/// nu = eps sqrt(omega0/2).
struct EpsilonState {
    complexd eps{0.0, 0.0};
    complexd eps_dot{0.0, 0.0};
    double t = 0.0;
};

inline EpsilonState epsilon_from_params(const SqueezedStateParams& sp, double t = 0.0) {
    require_constraint(sp, 1e-6);
    const double w0 = sp.params.omega0;
    EpsilonState e;
    e.eps = sp.nu * std::sqrt(2.0 / w0);
    e.eps_dot = complexd(0.0, 1.0) * sp.mu * std::sqrt(2.0 * w0);
    e.t = t;
    return e;
}

inline std::pair<complexd, complexd> mu_nu_from_epsilon(const EpsilonState& e,
                                                        const PhysicalParams& p) {
    const double w0 = p.omega0;
    const complexd mu = complexd(0.0, -1.0) * e.eps_dot / std::sqrt(2.0 * w0);
    const complexd nu = e.eps * std::sqrt(w0 / 2.0);
    return {mu, nu};
}

/// omega(t) for the oscillator: constant, piecewise-constant quench, or a
/// tabulated profile with linear interpolation.
class FrequencyProfile {
  public:
    static FrequencyProfile constant(double w) {
        if (!(w > 0.0)) throw std::invalid_argument("FrequencyProfile: omega must be positive");
        FrequencyProfile f;
        f.kind_ = Kind::constant;
        f.w0_ = w;
        return f;
    }

    /// Piecewise constant: value w0 until the first switch time, then each
    /// (t_i, w_i) takes over at t >= t_i.  Switch times must be increasing.
    static FrequencyProfile quench(double w0, std::vector<std::pair<double, double>> switches) {
        if (!(w0 > 0.0)) throw std::invalid_argument("FrequencyProfile: omega must be positive");
        for (std::size_t i = 0; i < switches.size(); ++i) {
            if (!(switches[i].second > 0.0))
                throw std::invalid_argument("FrequencyProfile: omega must be positive");
            if (i > 0 && !(switches[i].first > switches[i - 1].first))
                throw std::invalid_argument("FrequencyProfile: switch times must increase");
        }
        FrequencyProfile f;
        f.kind_ = Kind::quench;
        f.w0_ = w0;
        f.switches_ = std::move(switches);
        return f;
    }

    static FrequencyProfile table(std::vector<double> times, std::vector<double> omegas) {
        if (times.size() != omegas.size() || times.size() < 2)
            throw std::invalid_argument("FrequencyProfile: table needs >= 2 (t, omega) rows");
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!(omegas[i] > 0.0))
                throw std::invalid_argument("FrequencyProfile: omega must be positive");
            if (i > 0 && !(times[i] > times[i - 1]))
                throw std::invalid_argument("FrequencyProfile: table times must increase");
        }
        FrequencyProfile f;
        f.kind_ = Kind::table;
        f.times_ = std::move(times);
        f.omegas_ = std::move(omegas);
        return f;
    }

    double omega(double t) const {
        switch (kind_) {
            case Kind::constant:
                return w0_;
            case Kind::quench: {
                double w = w0_;
                for (const auto& [ts, ws] : switches_) {
                    if (t >= ts) w = ws;
                    else break;
                }
                return w;
            }
            case Kind::table: {
                if (t <= times_.front()) return omegas_.front();
                if (t >= times_.back()) return omegas_.back();
                auto it = std::upper_bound(times_.begin(), times_.end(), t);
                const std::size_t j = static_cast<std::size_t>(it - times_.begin());
                const double f = (t - times_[j - 1]) / (times_[j] - times_[j - 1]);
                return omegas_[j - 1] + f * (omegas_[j] - omegas_[j - 1]);
            }
        }
        return w0_;
    }

    double max_omega() const {
        double m = w0_;
        for (const auto& [ts, ws] : switches_) m = std::max(m, ws);
        for (double w : omegas_) m = std::max(m, w);
        return m;
    }

    /// Discontinuity times inside (t0, t1); the integrators land on these
    /// exactly so the quench has no time-discretization ambiguity.
    std::vector<double> switch_times(double t0, double t1) const {
        std::vector<double> out;
        if (kind_ == Kind::quench) {
            for (const auto& [ts, ws] : switches_)
                if (ts > t0 && ts < t1) out.push_back(ts);
        }
        return out;
    }

  private:
    enum class Kind { constant, quench, table };
    Kind kind_ = Kind::constant;
    double w0_ = 1.0;
    std::vector<std::pair<double, double>> switches_;
    std::vector<double> times_, omegas_;
};

namespace detail {

// One RK4 step of (eps, eps_dot)' = (eps_dot, -omega(t)^2 eps).
inline void rk4_step(EpsilonState& y, double h, const FrequencyProfile& w) {
    auto acc = [&w](double t, complexd e) {
        const double om = w.omega(t);
        if (!(om > 0.0)) throw std::runtime_error("evolve_epsilon: omega(t) <= 0");
        return -om * om * e;
    };
    const complexd k1e = y.eps_dot, k1d = acc(y.t, y.eps);
    const complexd k2e = y.eps_dot + k1d * (h / 2.0), k2d = acc(y.t + h / 2.0, y.eps + k1e * (h / 2.0));
    const complexd k3e = y.eps_dot + k2d * (h / 2.0), k3d = acc(y.t + h / 2.0, y.eps + k2e * (h / 2.0));
    const complexd k4e = y.eps_dot + k3d * h, k4d = acc(y.t + h, y.eps + k3e * h);
    y.eps += (k1e + (k2e + k3e) * 2.0 + k4e) * (h / 6.0);
    y.eps_dot += (k1d + (k2d + k3d) * 2.0 + k4d) * (h / 6.0);
    y.t += h;
}

}  // namespace detail

/// Fixed-step RK4 evolution of eps from e0.t to t_final.  Steps are sized
/// so that segment boundaries (quench switches, t_final) are hit exactly.
inline EpsilonState evolve_epsilon(const EpsilonState& e0, const FrequencyProfile& w,
                                   double t_final, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("evolve_epsilon: dt must be positive");
    if (t_final == e0.t) return e0;
    if (t_final < e0.t) throw std::invalid_argument("evolve_epsilon: t_final before initial time");
    EpsilonState y = e0;
    std::vector<double> knots = w.switch_times(e0.t, t_final);
    knots.push_back(t_final);
    for (double knot : knots) {
        const double seg = knot - y.t;
        if (seg <= 0.0) continue;
        const auto steps = static_cast<std::size_t>(std::ceil(seg / dt - 1e-12));
        const double h = seg / static_cast<double>(steps);
        for (std::size_t k = 0; k < steps; ++k) detail::rk4_step(y, h, w);
        y.t = knot;  // kill accumulated roundoff in t
    }
    return y;
}

/// Evolves squeezed-state parameters: alpha is constant, (mu, nu) follow
/// the epsilon equation.
inline SqueezedStateParams evolve_params(const SqueezedStateParams& sp, const FrequencyProfile& w,
                                         double t_final, double dt = 1e-3) {
    EpsilonState e = evolve_epsilon(epsilon_from_params(sp), w, t_final, dt);
    auto [mu, nu] = mu_nu_from_epsilon(e, sp.params);
    SqueezedStateParams out = sp;
    out.mu = mu;
    out.nu = nu;
    return out;
}

/// Coherent-state eigenvalue under a constant frequency: alpha(t) = alpha e^{-i w t}.
inline complexd coherent_alpha_at(complexd alpha, double omega, double t) {
    return alpha * std::exp(complexd(0.0, -omega * t));
}

inline double mean_x_closed_form(const SqueezedStateParams& sp) {
    return 2.0 * sp.params.length_scale() * std::real(sp.alpha * std::conj(sp.nu));
}

inline double mean_p_closed_form(const SqueezedStateParams& sp) {
    const double l = sp.params.length_scale();
    return 2.0 * (sp.params.hbar / l) * std::imag(sp.alpha * std::conj(sp.mu));
}

/// Samples the normalized squeezed-state wave function on the grid.
/// Throws if the grid leaves more than ~1e-10 of probability outside.
inline ComplexField eval_psi(const SqueezedStateParams& sp, const Grid& g) {
    require_constraint(sp, 1e-6);
    const double l = sp.params.length_scale();
    const double sigma_x = l * std::abs(sp.nu);
    const double xbar = mean_x_closed_form(sp);

    const double dist = std::min(xbar - g.x_min, g.x_max - xbar);
    if (dist < 4.0 * sigma_x)
        throw std::invalid_argument("eval_psi: grid narrower than 8 standard deviations");
    const double tail_mass = std::erfc(dist / (sigma_x * std::sqrt(2.0)));
    if (tail_mass > 1e-10)
        throw std::invalid_argument("eval_psi: grid too narrow, tail mass above 1e-10");

    const complexd pref =
        1.0 / std::sqrt(l * sp.nu * std::sqrt(2.0 * M_PI));
    const complexd shape = -sp.mu / (2.0 * l * l * sp.nu);
    const complexd center = (l / sp.mu) * sp.alpha;
    const complexd phase =
        std::exp(-0.5 * (std::norm(sp.alpha) - (std::conj(sp.mu) / sp.mu) * sp.alpha * sp.alpha));

    ComplexField psi(g);
    for (std::size_t i = 0; i < g.n; ++i) {
        const complexd d = complexd(g.x(i), 0.0) - center;
        psi.values[i] = pref * phase * std::exp(shape * d * d);
    }
    return psi;
}

/// All first and second moments of (x, p_c, p_s, p) plus the quantum
/// moments, from the closed forms of the squeezed-state density and phase.
inline MomentReport analytic_moments(const SqueezedStateParams& sp) {
    require_constraint(sp, 1e-6);
    const double hbar = sp.params.hbar;
    const double l = sp.params.length_scale();
    const double nu2 = std::norm(sp.nu);
    const double mu2 = std::norm(sp.mu);
    const double im = std::imag(sp.mu * std::conj(sp.nu));

    MomentReport m;
    m.mean_x = mean_x_closed_form(sp);
    m.mean_p = mean_p_closed_form(sp);
    m.var_x = l * l * nu2;
    m.var_ps = hbar * hbar / (4.0 * l * l * nu2);
    m.var_pc = (hbar * hbar / (l * l)) * im * im / nu2;  // = |mu|^2 sin^2(dphi)
    m.var_p = (hbar * hbar / (l * l * nu2)) * (0.5 + im) * (0.5 + im);
    m.cov_x_pc = -hbar * im;
    m.cov_x_ps = -hbar / 2.0;
    m.cov_x_p = -hbar * (0.5 + im);
    m.cov_pc_ps = (hbar * hbar / (2.0 * l * l * nu2)) * im;
    m.q_var_x = l * l * nu2;
    m.q_var_p = (hbar * hbar / (l * l)) * mu2;
    m.q_cov_xp = hbar * std::imag(std::conj(sp.mu) * sp.nu);
    m.fisher_info = 1.0 / (l * l * nu2);  // Gaussian density
    m.fisher_length_sq = l * l * nu2;
    m.mean_ps_cubed = 0.0;
    return m;
}

/// Normalized deviation of the stochastic total-momentum variance from the
/// quantum one; oscillates in [-1, 1] and vanishes when arg(mu) = arg(nu).
inline double r_p_closed_form(const SqueezedStateParams& sp) {
    require_constraint(sp, 1e-6);
    return -std::imag(sp.mu * std::conj(sp.nu)) / std::norm(sp.mu * sp.nu);
}

}  // namespace osmotic

#endif
