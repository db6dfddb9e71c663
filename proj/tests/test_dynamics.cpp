#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "osmotic/dynamics.hpp"
#include "osmotic/moments.hpp"
#include "osmotic/states.hpp"

using namespace osmotic;
using Catch::Matchers::WithinAbs;

namespace {

const PhysicalParams kUnit(1.0, 1.0, 1.0);

SnapshotTriple analytic_triple(const SqueezedStateParams& sp0, const FrequencyProfile& w,
                               const Grid& g, double t0, double delta) {
    auto at = [&](double t) {
        return eval_psi(t != 0.0 ? evolve_params(sp0, w, t, 1e-4) : sp0, g);
    };
    SnapshotTriple tr;
    tr.psi_minus = at(t0 - delta);
    tr.psi_center = at(t0);
    tr.psi_plus = at(t0 + delta);
    tr.t0 = t0;
    tr.delta = delta;
    return tr;
}

ComplexField perturb_density(const ComplexField& psi, double eps) {
    ComplexField out = psi;
    for (std::size_t i = 0; i < psi.size(); ++i)
        out.values[i] *= std::sqrt(1.0 + eps * std::sin(4.0 * psi.grid.x(i)));
    return normalize(out);
}

}  // namespace

TEST_CASE("compare_states basics") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    const ComplexField a = eval_psi(coherent_params(complexd(0, 0), kUnit), g);
    const StateDistance same = compare_states(a, a);
    REQUIRE_THAT(same.fidelity, WithinAbs(1.0, 1e-12));
    REQUIRE_THAT(same.l2_error_mod_phase, WithinAbs(0.0, 1e-6));

    ComplexField rotated = a;
    for (auto& v : rotated.values) v *= std::exp(complexd(0.0, 1.234));
    const StateDistance rot = compare_states(a, rotated);
    REQUIRE_THAT(rot.l2_error_mod_phase, WithinAbs(0.0, 1e-6));
    REQUIRE_THAT(rot.fidelity, WithinAbs(1.0, 1e-12));

    // orthogonal: ground state vs normalized x * ground state
    ComplexField odd = a;
    for (std::size_t i = 0; i < g.n; ++i) odd.values[i] *= g.x(i);
    odd = normalize(odd);
    REQUIRE_THAT(compare_states(a, odd).fidelity, WithinAbs(0.0, 1e-12));
}

TEST_CASE("stationary ground state under Crank-Nicolson") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    const ComplexField psi0 = eval_psi(coherent_params(complexd(0, 0), kUnit), g);
    PdeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0 * M_PI;
    cfg.snapshot_times = {2.0 * M_PI};
    const auto snaps = evolve_pde(psi0, cfg, kUnit);
    REQUIRE(snaps.size() == 1);
    const StateDistance d = compare_states(psi0, snaps.back().psi);
    REQUIRE(std::abs(d.fidelity - 1.0) < 1e-6);
}

TEST_CASE("coherent state returns after one period: L2 < 1e-4 at n=1024") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    const auto cs = coherent_params(complexd(1.0, 0.0), kUnit);
    const ComplexField psi0 = eval_psi(cs, g);
    PdeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0 * M_PI;
    cfg.snapshot_times = {2.0 * M_PI};
    const auto snaps = evolve_pde(psi0, cfg, kUnit);
    const StateDistance d = compare_states(psi0, snaps.back().psi);
    INFO("L2 mod phase = " << d.l2_error_mod_phase);
    REQUIRE(d.l2_error_mod_phase < 1e-4);

    const double drift = std::abs(norm_squared(snaps.back().psi) - norm_squared(psi0));
    REQUIRE(drift < 1e-10);
}

TEST_CASE("squeezed state through a frequency quench matches the epsilon ODE") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    const auto sp0 = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const auto w = FrequencyProfile::quench(1.0, {{0.0, 2.0}});
    const double T = 2.0;

    const ComplexField psi0 = eval_psi(sp0, g);
    PdeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = T;
    cfg.profile = w;
    cfg.snapshot_times = {T};
    const auto snaps = evolve_pde(psi0, cfg, kUnit);

    const auto spT = evolve_params(sp0, w, T, 1e-4);
    const ComplexField ref = eval_psi(spT, g);
    const StateDistance d = compare_states(ref, snaps.back().psi);
    INFO("L2 mod phase = " << d.l2_error_mod_phase);
    REQUIRE(d.l2_error_mod_phase < 1e-4);
}

TEST_CASE("energy is conserved at constant frequency") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    const auto cs = coherent_params(complexd(1.0, 0.5), kUnit);
    const ComplexField psi0 = eval_psi(cs, g);
    PdeConfig cfg;
    cfg.dt = 1e-3;
    cfg.t_final = 2.0 * M_PI;
    cfg.snapshot_times = {M_PI, 2.0 * M_PI};
    const auto snaps = evolve_pde(psi0, cfg, kUnit);
    const double e0 = mean_energy(psi0, 1.0, kUnit);
    for (const auto& s : snaps) {
        REQUIRE_THAT((mean_energy(s.psi, 1.0, kUnit) - e0) / e0, WithinAbs(0.0, 1e-6));
    }
}

TEST_CASE("evolve_pde input validation") {
    const Grid g = make_grid(-12.0, 12.0, 1024);
    ComplexField psi0 = eval_psi(coherent_params(complexd(0, 0), kUnit), g);
    PdeConfig cfg;
    cfg.dt = -1.0;
    REQUIRE_THROWS_AS(evolve_pde(psi0, cfg, kUnit), std::invalid_argument);

    cfg.dt = 1e-3;
    cfg.t_final = 1.0;
    ComplexField bad = psi0;
    for (auto& v : bad.values) v *= 1.5;
    REQUIRE_THROWS_AS(evolve_pde(bad, cfg, kUnit), std::invalid_argument);
}

TEST_CASE("Bohm residuals on the analytic coherent trajectory") {
    const Grid g = make_grid(-12.0, 12.0, 2048);
    const auto cs = coherent_params(complexd(1.0, 0.0), kUnit);
    const auto w = FrequencyProfile::constant(1.0);
    const SnapshotTriple tr = analytic_triple(cs, w, g, 0.9, 1e-4);
    const ResidualReport rep = bohm_residuals(tr, w, kUnit);
    INFO("continuity " << rep.continuity_rms << " hjm " << rep.hjm_rms << " raw "
                       << rep.hjm_rms_raw);
    REQUIRE(rep.continuity_rms < 1e-5);
    REQUIRE(rep.hjm_rms < 1e-5);
}

TEST_CASE("Bohm residuals on the analytic squeezed trajectory") {
    const Grid g = make_grid(-10.0, 10.0, 2048);
    const auto sq = squeeze_params(std::log(2.0), complexd(0, 0), kUnit);
    const auto w = FrequencyProfile::constant(1.0);
    for (double t0 : {0.7, 1.9}) {
        const SnapshotTriple tr = analytic_triple(sq, w, g, t0, 1e-4);
        const ResidualReport rep = bohm_residuals(tr, w, kUnit);
        INFO("t0 " << t0 << ": continuity " << rep.continuity_rms << " hjm " << rep.hjm_rms);
        REQUIRE(rep.continuity_rms < 1e-5);
        REQUIRE(rep.hjm_rms < 1e-5);
    }
}

TEST_CASE("ground-state continuity residual is at round-off level") {
    const Grid g = make_grid(-12.0, 12.0, 2048);
    const auto cs = coherent_params(complexd(0, 0), kUnit);
    const auto w = FrequencyProfile::constant(1.0);
    const SnapshotTriple tr = analytic_triple(cs, w, g, 0.5, 1e-4);
    const ResidualReport rep = bohm_residuals(tr, w, kUnit);
    REQUIRE(rep.continuity_rms < 1e-12);

    const ResidualReport ext = extremal_residuals(tr, w, kUnit);
    REQUIRE(ext.extremal1_rms < 1e-10);
}

TEST_CASE("perturbed density is a working negative control") {
    const Grid g = make_grid(-12.0, 12.0, 2048);
    const auto cs = coherent_params(complexd(1.0, 0.0), kUnit);
    const auto w = FrequencyProfile::constant(1.0);
    SnapshotTriple tr = analytic_triple(cs, w, g, 0.9, 1e-4);
    tr.psi_minus = perturb_density(tr.psi_minus, 0.01);
    tr.psi_center = perturb_density(tr.psi_center, 0.01);
    tr.psi_plus = perturb_density(tr.psi_plus, 0.01);
    const ResidualReport rep = bohm_residuals(tr, w, kUnit);
    INFO("perturbed hjm " << rep.hjm_rms);
    REQUIRE(rep.hjm_rms > 1e-2);
}

TEST_CASE("extremal system holds on analytic trajectories") {
    const auto w = FrequencyProfile::constant(1.0);
    const Grid g = make_grid(-10.0, 10.0, 2048);
    const auto sq = squeeze_params(std::log(2.0), complexd(0.3, 0.2), kUnit);
    for (double t0 : {0.6, 1.4}) {
        const SnapshotTriple tr = analytic_triple(sq, w, g, t0, 1e-4);
        const ResidualReport rep = extremal_residuals(tr, w, kUnit);
        INFO("t0 " << t0 << ": e1 " << rep.extremal1_rms << " e2 " << rep.extremal2_rms);
        REQUIRE(rep.extremal1_rms < 1e-4);
        REQUIRE(rep.extremal2_rms < 1e-4);
    }

    // corrupted phase blows up the extremal residuals
    SnapshotTriple tr = analytic_triple(sq, w, g, 0.6, 1e-4);
    for (auto* f : {&tr.psi_minus, &tr.psi_center, &tr.psi_plus})
        for (std::size_t i = 0; i < g.n; ++i)
            f->values[i] *= std::exp(complexd(0.0, 0.01 * std::sin(2.0 * g.x(i))));
    const ResidualReport bad = extremal_residuals(tr, w, kUnit);
    REQUIRE(bad.extremal2_rms > 1e-3);
}

TEST_CASE("Bohm residuals shrink as the grid refines") {
    const auto cs = coherent_params(complexd(1.0, 0.0), kUnit);
    const auto w = FrequencyProfile::constant(1.0);
    auto rms_at = [&](std::size_t n) {
        const Grid g = make_grid(-12.0, 12.0, n);
        const SnapshotTriple tr = analytic_triple(cs, w, g, 0.9, 1e-5);
        return bohm_residuals(tr, w, kUnit).hjm_rms;
    };
    const double coarse = rms_at(512);
    const double fine = rms_at(1024);
    INFO("coarse " << coarse << " fine " << fine);
    REQUIRE(fine * 4.0 < coarse);
}

TEST_CASE("PDE-evolved snapshots satisfy the Bohm equations") {
    const Grid g = make_grid(-12.0, 12.0, 2048);
    const auto cs = coherent_params(complexd(1.0, 0.0), kUnit);
    const ComplexField psi0 = eval_psi(cs, g);
    const double t0 = 0.5, delta = 1e-4;
    PdeConfig cfg;
    cfg.dt = 1e-4;
    cfg.t_final = t0 + delta;
    cfg.snapshot_times = {t0 - delta, t0, t0 + delta};
    const auto snaps = evolve_pde(psi0, cfg, kUnit);
    REQUIRE(snaps.size() == 3);
    SnapshotTriple tr{snaps[0].psi, snaps[1].psi, snaps[2].psi, t0, delta};
    const ResidualReport rep = bohm_residuals(tr, FrequencyProfile::constant(1.0), kUnit);
    INFO("pde continuity " << rep.continuity_rms << " hjm " << rep.hjm_rms);
    REQUIRE(rep.continuity_rms < 1e-4);
    REQUIRE(rep.hjm_rms < 1e-4);
}
