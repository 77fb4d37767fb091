#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/test_helpers.hpp"
#include "tdhf/diagnostics.hpp"

using namespace tdhf;
using namespace tdhf::test;

TEST_CASE("energy report: null state, plane wave, arithmetic identities") {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix null_state =
        new_state({0.0}, {gaussian_orbital(g, {0, 0, 0}, 1.0, {0, 0, 0})});
    EnergyReport r0 = energy_report(null_state, 0.0);
    CHECK(r0.trace == 0.0);
    CHECK(r0.trace_norm == 0.0);
    CHECK(r0.e_kin == 0.0);
    CHECK(r0.e_tot == 0.0);
    CHECK(std::abs(r0.e_pot) < 1e-300);

    auto gpw = make_grid(1, 64, 8.0 * M_PI);
    DensityMatrix pw = new_state({1.0}, {plane_wave(gpw, {4, 0, 0})});
    EnergyReport rp = energy_report(pw, 0.0, /*coupling=*/0.0);
    CHECK(rp.e_kin == Catch::Approx(0.5).epsilon(1e-12));
    CHECK(rp.e_hartree == rp.e_exchange);
    CHECK(rp.e_tot == Catch::Approx(0.5).epsilon(1e-12));

    std::mt19937 rng(23);
    DensityMatrix rho = random_state(g, 3, rng, false);
    EnergyReport rr = energy_report(rho, 1.25);
    CHECK(rr.t == 1.25);
    CHECK(rr.e_pot == rr.e_hartree - rr.e_exchange);
    CHECK(rr.e_tot == rr.e_kin + rr.e_pot);
    CHECK(rr.e_kin_abs >= std::abs(rr.e_kin) - 1e-14);

    DensityMatrix pos = random_state(g, 2, rng, true);
    EnergyReport rpos = energy_report(pos, 0.0);
    CHECK(rpos.e_kin >= 0.0);
    CHECK(rpos.e_pot >= -1e-10);
    CHECK(rpos.min_eigenvalue >= -1e-12);
    CHECK(rpos.occupation_drift < 1e-10);
    CHECK(rpos.gram_defect < 1e-10);
}

TEST_CASE("conservation audit: free trajectory passes at machine tolerance") {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix rho = soft_rank2_state(g);
    PropagatorConfig cfg;
    cfg.dt = 5e-3;
    cfg.t_final = 0.5;
    cfg.sample_stride = 10;
    cfg.interactions = false;
    Trajectory traj = run_orbital(rho, cfg);
    annotate(traj);
    AuditSummary audit = conservation_audit(traj);
    CHECK(audit.passed);
    for (const auto& c : audit.checks) CHECK(c.value < 1e-10);
}

TEST_CASE("conservation audit: interacting run passes, coarse run fails") {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix rho = soft_rank2_state(g);

    PropagatorConfig fine;
    fine.dt = 1e-3;
    fine.t_final = 0.5;
    fine.sample_stride = 25;
    Trajectory traj = run_orbital(rho, fine);
    CHECK(conservation_audit(traj).passed);

    PropagatorConfig coarse = fine;
    coarse.dt = 0.1;
    coarse.t_final = 1.0;
    coarse.sample_stride = 1;
    Trajectory bad = run_orbital(rho, coarse);
    AuditSummary audit = conservation_audit(bad);
    CHECK_FALSE(audit.passed);
    bool energy_named = false;
    for (const auto& f : audit.failures)
        if (f.find("energy") != std::string::npos) energy_named = true;
    CHECK(energy_named);
}

TEST_CASE("conservation audit rejects trajectories without two samples") {
    auto g = make_grid(1, 64, 16.0);
    Trajectory traj;
    traj.times = {0.0};
    traj.states = {soft_rank2_state(g)};
    CHECK_THROWS_AS(conservation_audit(traj), std::invalid_argument);
}

TEST_CASE("kinetic bound: positive runs satisfy it, signed states skip it") {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix rho = soft_rank2_state(g);
    PropagatorConfig cfg;
    cfg.dt = 2e-3;
    cfg.t_final = 0.5;
    cfg.sample_stride = 25;
    Trajectory traj = run_orbital(rho, cfg);
    KineticBoundResult kb = kinetic_bound_check(traj);
    CHECK(kb.applicable);
    CHECK(kb.passed);
    CHECK(kb.min_lower_margin >= -1e-8);
    CHECK(kb.min_upper_margin >= -1e-8);

    cfg.interactions = false;
    DensityMatrix signed_state = new_state(
        {0.6, -0.4}, {gaussian_orbital(g, {-1, 0, 0}, 1.0, {0, 0, 0}),
                      gaussian_orbital(g, {1, 0, 0}, 0.9, {0, 0, 0})});
    Trajectory ts = run_orbital(signed_state, cfg);
    KineticBoundResult kbs = kinetic_bound_check(ts);
    CHECK_FALSE(kbs.applicable);
}

TEST_CASE("Lieb-Thirring scan: mass identity, dilation invariance, errors") {
    auto g = make_grid(3, 64, 20.0);
    auto dilated = [&](double s) {
        // phi_s(x) = s^{3/2} phi(s x): width 0.9 / s on the same grid
        return new_state({1.0},
                         {gaussian_orbital(g, {0, 0, 0}, 0.9 / s, {0, 0, 0})});
    };
    DensityMatrix base = dilated(1.0);
    auto checks = lieb_thirring_scan(base, {1.0});
    CHECK(checks[0].alpha == Catch::Approx(1.0));
    CHECK(checks[0].ratio == Catch::Approx(1.0).epsilon(1e-10));

    DensityMatrix narrow = dilated(2.0);
    for (double q : {1.5, 2.0, 3.0}) {
        const double r1 = lieb_thirring_scan(base, {q})[0].ratio;
        const double r2 = lieb_thirring_scan(narrow, {q})[0].ratio;
        CHECK(std::abs(r1 - r2) / r1 < 1e-3);
    }

    CHECK_THROWS_AS(lieb_thirring_scan(base, {0.5}), std::invalid_argument);
    CHECK_THROWS_AS(lieb_thirring_scan(base, {3.5}), std::invalid_argument);
    auto g1 = make_grid(1, 64, 16.0);
    DensityMatrix r1d = soft_rank2_state(g1);
    CHECK_THROWS_AS(lieb_thirring_scan(r1d, {2.0}), std::invalid_argument);
}

TEST_CASE("mean-field energy identity holds spectrally in 3D") {
    auto g = make_grid(3, 16, 14.0);
    DensityMatrix rho = coulomb_rank2_state(g);
    const auto [lhs, rhs] = hartree_energy_identity(rho);
    CHECK(std::abs(lhs - rhs) / std::abs(rhs) < 1e-8);

    // rank-1 positive states: Hartree and exchange energies coincide
    DensityMatrix pure =
        new_state({1.0}, {gaussian_orbital(g, {0, 0, 0}, 1.0, {0, 0, 0})});
    const auto [eh, ex] = potential_energies(pure);
    CHECK(eh == Catch::Approx(ex).margin(1e-10));
}
