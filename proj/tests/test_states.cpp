#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "osmotic/moments.hpp"
#include "osmotic/states.hpp"

using namespace osmotic;
using Catch::Matchers::WithinAbs;

namespace {

const PhysicalParams kUnit(1.0, 1.0, 1.0);

SqueezedStateParams random_squeezed(std::mt19937_64& rng, const PhysicalParams& p = kUnit) {
    std::uniform_real_distribution<double> ur(-1.5, 1.5), ut(0.0, 2.0 * M_PI), ua(-1.0, 1.0);
    SqueezedStateParams sp = squeeze_params(ur(rng), complexd(ua(rng), ua(rng)), p);
    return evolve_params(sp, FrequencyProfile::constant(1.0), ut(rng), 1e-3);
}

}  // namespace

TEST_CASE("coherent parameters") {
    const auto sp = coherent_params(complexd(0.0, 0.0), kUnit);
    REQUIRE_THAT(sp.mu.real(), WithinAbs(0.7071067811865475, 1e-15));
    REQUIRE_THAT(sp.nu.real(), WithinAbs(0.7071067811865475, 1e-15));
    REQUIRE(sp.mu.imag() == 0.0);
    REQUIRE_THAT(sp.constraint_defect(), WithinAbs(0.0, 1e-15));

    const auto sp2 = coherent_params(complexd(1.0, 2.0), kUnit);
    REQUIRE(sp2.alpha == complexd(1.0, 2.0));
    REQUIRE(sp2.mu == sp.mu);
}

TEST_CASE("squeeze parameters") {
    const auto cs = squeeze_params(0.0, complexd(0, 0), kUnit);
    REQUIRE_THAT(std::abs(cs.mu - complexd(1.0 / std::sqrt(2.0), 0)), WithinAbs(0.0, 1e-15));

    const auto sp = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    REQUIRE_THAT(sp.mu.real(), WithinAbs(std::sqrt(2.0), 1e-14));
    REQUIRE_THAT(sp.nu.real(), WithinAbs(1.0 / (2.0 * std::sqrt(2.0)), 1e-14));
    REQUIRE_THAT(sp.constraint_defect(), WithinAbs(0.0, 1e-14));

    const auto sm = squeeze_params(-std::log(2.0), complexd(0, 0), kUnit);
    REQUIRE_THAT(sm.mu.real(), WithinAbs(1.0 / (2.0 * std::sqrt(2.0)), 1e-14));
    REQUIRE_THAT(sm.nu.real(), WithinAbs(std::sqrt(2.0), 1e-14));

    REQUIRE_THROWS_AS(squeeze_params(std::nan(""), complexd(0, 0), kUnit),
                      std::invalid_argument);
}

TEST_CASE("epsilon substitutions and round trip") {
    const auto cs = coherent_params(complexd(0, 0), kUnit);
    const EpsilonState e = epsilon_from_params(cs);
    REQUIRE_THAT(std::abs(e.eps - complexd(1.0, 0.0)), WithinAbs(0.0, 1e-14));
    REQUIRE_THAT(std::abs(e.eps_dot - complexd(0.0, 1.0)), WithinAbs(0.0, 1e-14));

    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const EpsilonState e2 = epsilon_from_params(sq);
    REQUIRE_THAT(std::abs(e2.eps - complexd(0.5, 0.0)), WithinAbs(0.0, 1e-14));
    REQUIRE_THAT(std::abs(e2.eps_dot - complexd(0.0, 2.0)), WithinAbs(0.0, 1e-14));

    auto [mu, nu] = mu_nu_from_epsilon(e2, kUnit);
    REQUIRE_THAT(std::abs(mu - sq.mu), WithinAbs(0.0, 1e-12));
    REQUIRE_THAT(std::abs(nu - sq.nu), WithinAbs(0.0, 1e-12));

    SqueezedStateParams bad = sq;
    bad.mu *= 1.01;
    REQUIRE_THROWS_AS(epsilon_from_params(bad), std::invalid_argument);
}

TEST_CASE("epsilon evolution: period return and closed form") {
    const auto w = FrequencyProfile::constant(1.0);
    const auto cs = coherent_params(complexd(0, 0), kUnit);
    EpsilonState e0 = epsilon_from_params(cs);

    const EpsilonState eT = evolve_epsilon(e0, w, 2.0 * M_PI, 1e-3);
    REQUIRE_THAT(std::abs(eT.eps - e0.eps), WithinAbs(0.0, 1e-8));
    REQUIRE_THAT(std::abs(eT.eps_dot - e0.eps_dot), WithinAbs(0.0, 1e-8));

    // r = ln 2 at t = pi/4: eps = cos(t)/2 + 2i sin(t)
    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const EpsilonState e1 = evolve_epsilon(epsilon_from_params(sq), w, M_PI / 4.0, 1e-3);
    const complexd expect(0.5 * std::cos(M_PI / 4.0), 2.0 * std::sin(M_PI / 4.0));
    REQUIRE_THAT(std::abs(e1.eps - expect), WithinAbs(0.0, 1e-10));

    const EpsilonState same = evolve_epsilon(e1, w, e1.t, 1e-3);
    REQUIRE(same.eps == e1.eps);

    REQUIRE_THROWS_AS(evolve_epsilon(e0, w, 1.0, -1e-3), std::invalid_argument);
}

TEST_CASE("constraint is conserved over ten periods") {
    const auto w = FrequencyProfile::constant(1.0);
    const auto sq = squeeze_params(0.8, complexd(0.3, -0.2), kUnit);
    EpsilonState e = epsilon_from_params(sq);
    for (int k = 1; k <= 10; ++k) {
        e = evolve_epsilon(e, w, 2.0 * M_PI * k, 1e-3);
        auto [mu, nu] = mu_nu_from_epsilon(e, kUnit);
        REQUIRE_THAT(2.0 * std::real(std::conj(mu) * nu) - 1.0, WithinAbs(0.0, 1e-9));
    }
}

TEST_CASE("mu nu at r=ln2, t=pi/4 under constant frequency") {
    const auto sp = evolve_params(squeeze_params(std::log(2.0), complexd(0, 0), kUnit),
                                  FrequencyProfile::constant(1.0), M_PI / 4.0, 1e-3);
    REQUIRE_THAT(std::imag(sp.mu * std::conj(sp.nu)), WithinAbs(-15.0 / 16.0, 1e-10));
    REQUIRE_THAT(std::norm(sp.mu), WithinAbs(17.0 / 16.0, 1e-10));
    REQUIRE_THAT(std::norm(sp.nu), WithinAbs(17.0 / 16.0, 1e-10));

    // CS initial condition maps to mu = nu = 1/sqrt(2)
    const EpsilonState e{complexd(1.0, 0.0), complexd(0.0, 1.0), 0.0};
    auto [mu, nu] = mu_nu_from_epsilon(e, kUnit);
    REQUIRE_THAT(std::abs(mu - complexd(1.0 / std::sqrt(2.0), 0)), WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(std::abs(nu - mu), WithinAbs(0.0, 1e-15));
}

TEST_CASE("quench profile switches exactly") {
    const auto w = FrequencyProfile::quench(1.0, {{0.5, 2.0}});
    REQUIRE(w.omega(0.49) == 1.0);
    REQUIRE(w.omega(0.5) == 2.0);
    REQUIRE(w.omega(3.0) == 2.0);
    REQUIRE_THROWS_AS(FrequencyProfile::quench(1.0, {{0.5, -2.0}}), std::invalid_argument);

    // Wronskian-type constraint survives the quench.
    const auto sq = squeeze_params(0.5, complexd(0, 0), kUnit);
    const auto sp = evolve_params(sq, w, 3.0, 1e-3);
    REQUIRE_THAT(sp.constraint_defect(), WithinAbs(0.0, 1e-9));
}

TEST_CASE("eval_psi ground state and norms") {
    const Grid g = make_grid(-12.0, 12.0, 2048);
    const auto cs = coherent_params(complexd(0, 0), kUnit);
    const ComplexField psi = eval_psi(cs, g);

    // matches pi^{-1/4} e^{-x^2/2} up to a constant phase
    const complexd ratio0 = psi.values[g.mid()] /
                            complexd(std::pow(M_PI, -0.25) *
                                     std::exp(-g.x(g.mid()) * g.x(g.mid()) / 2.0), 0.0);
    for (std::size_t i = g.n / 4; i < 3 * g.n / 4; i += 17) {
        const double ref = std::pow(M_PI, -0.25) * std::exp(-g.x(i) * g.x(i) / 2.0);
        REQUIRE_THAT(std::abs(psi.values[i] - ratio0 * ref), WithinAbs(0.0, 1e-12));
    }
    REQUIRE_THAT(norm_squared(psi), WithinAbs(1.0, 1e-10));

    std::mt19937_64 rng(11);
    for (int k = 0; k < 8; ++k) {
        const auto sp = random_squeezed(rng);
        REQUIRE_THAT(norm_squared(eval_psi(sp, make_grid(-26.0, 26.0, 3000))),
                     WithinAbs(1.0, 1e-8));
    }

    // r = ln 2 squeezes the density to sigma_x^2 = 1/8
    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const ComplexField psis = eval_psi(sq, g);
    const RealField rho = abs_squared(psis);
    RealField x2rho(g);
    for (std::size_t i = 0; i < g.n; ++i) x2rho.values[i] = g.x(i) * g.x(i) * rho.values[i];
    REQUIRE_THAT(integrate(x2rho), WithinAbs(0.125, 1e-10));

    REQUIRE_THROWS_AS(eval_psi(cs, make_grid(-3.0, 3.0, 64)), std::invalid_argument);
}

TEST_CASE("analytic moments: coherent state") {
    const auto m = analytic_moments(coherent_params(complexd(0, 0), kUnit));
    REQUIRE_THAT(m.var_x, WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m.var_ps, WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m.var_pc, WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(m.var_p, WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m.cov_x_ps, WithinAbs(-0.5, 1e-15));
    REQUIRE_THAT(m.cov_pc_ps, WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(m.q_var_p, WithinAbs(0.5, 1e-15));
    REQUIRE_THAT(m.fisher_info, WithinAbs(2.0, 1e-15));
    REQUIRE_THAT(m.mean_ps_cubed, WithinAbs(0.0, 1e-15));
}

TEST_CASE("analytic moments: r=ln2 at t=0 and t=pi/4") {
    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const auto m0 = analytic_moments(sq);
    REQUIRE_THAT(m0.var_x, WithinAbs(0.125, 1e-14));
    REQUIRE_THAT(m0.var_ps, WithinAbs(2.0, 1e-14));
    REQUIRE_THAT(m0.var_pc, WithinAbs(0.0, 1e-14));
    REQUIRE_THAT(m0.var_p, WithinAbs(2.0, 1e-14));
    REQUIRE_THAT(m0.cov_x_p, WithinAbs(-0.5, 1e-14));
    REQUIRE_THAT(m0.q_var_p, WithinAbs(2.0, 1e-14));

    const auto sp = evolve_params(sq, FrequencyProfile::constant(1.0), M_PI / 4.0, 1e-3);
    const auto m = analytic_moments(sp);
    REQUIRE_THAT(m.q_var_p, WithinAbs(17.0 / 16.0, 1e-10));
    REQUIRE_THAT(m.var_p, WithinAbs(49.0 / 272.0, 1e-10));
    REQUIRE_THAT(m.cov_x_p, WithinAbs(7.0 / 16.0, 1e-10));
    REQUIRE_THAT(m.cov_pc_ps, WithinAbs(-15.0 / 34.0, 1e-10));
    REQUIRE_THAT(m.var_pc, WithinAbs(225.0 / 272.0, 1e-10));
    REQUIRE_THAT(m.var_ps, WithinAbs(4.0 / 17.0, 1e-10));
}

TEST_CASE("r_p closed form") {
    REQUIRE_THAT(r_p_closed_form(coherent_params(complexd(0.4, -0.2), kUnit)),
                 WithinAbs(0.0, 1e-15));
    REQUIRE_THAT(r_p_closed_form(squeeze_params(std::log(2.0), complexd(0, 0), kUnit)),
                 WithinAbs(0.0, 1e-15));
    const auto sp = evolve_params(squeeze_params(std::log(2.0), complexd(0, 0), kUnit),
                                  FrequencyProfile::constant(1.0), M_PI / 4.0, 1e-3);
    REQUIRE_THAT(r_p_closed_form(sp), WithinAbs(240.0 / 289.0, 1e-10));
}

TEST_CASE("algebraic identities over random squeezed states") {
    std::mt19937_64 rng(42);
    for (int k = 0; k < 200; ++k) {
        const auto sp = random_squeezed(rng);
        const auto m = analytic_moments(sp);

        // r_p two routes
        REQUIRE_THAT(r_p_closed_form(sp) - r_p_from_moments(m), WithinAbs(0.0, 1e-12));
        REQUIRE(std::abs(r_p_closed_form(sp)) <= 1.0 + 1e-12);

        // momentum decomposition and covariance identities
        REQUIRE_THAT(m.var_ps - (m.q_var_p - m.var_pc), WithinAbs(0.0, 1e-12));
        REQUIRE_THAT(m.q_cov_xp - m.cov_x_pc, WithinAbs(0.0, 1e-13));

        // quantum R-S saturation
        REQUIRE_THAT(m.q_var_x * m.q_var_p - m.q_cov_xp * m.q_cov_xp, WithinAbs(0.25, 1e-12));

        // dimensionless quantum sum stays above 1
        REQUIRE(m.q_var_x + m.q_var_p >= 1.0 - 1e-12);
    }
}

TEST_CASE("stochastic sum UR can be violated in squeezed states") {
    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const double t_star = 0.5 * std::asin(8.0 / 15.0);
    const auto sp = evolve_params(sq, FrequencyProfile::constant(1.0), t_star, 1e-4);
    const auto m = analytic_moments(sp);
    const double sum = m.var_x + m.var_p;  // dimensionless at hbar=m=omega0=1
    REQUIRE_THAT(sum, WithinAbs(0.26946390372190493, 1e-6));
    REQUIRE(sum < 1.0);
}

TEST_CASE("coherent alpha rotation matches the epsilon route") {
    const complexd alpha(0.7, -0.4);
    const auto cs = coherent_params(alpha, kUnit);
    for (double t : {0.3, 1.1, 4.0}) {
        const auto sp = evolve_params(cs, FrequencyProfile::constant(1.0), t, 1e-3);
        const complexd at = coherent_alpha_at(alpha, 1.0, t);
        REQUIRE_THAT(mean_x_closed_form(sp), WithinAbs(std::sqrt(2.0) * at.real(), 1e-9));
        REQUIRE_THAT(mean_p_closed_form(sp), WithinAbs(std::sqrt(2.0) * at.imag(), 1e-9));
    }
}
