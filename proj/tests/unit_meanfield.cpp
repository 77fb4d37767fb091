#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "support/dense_oracle.hpp"
#include "support/test_helpers.hpp"
#include "tdhf/meanfield.hpp"

using namespace tdhf;
using namespace tdhf::test;

TEST_CASE("hartree potential: uniform density, realness, additivity") {
    auto g = make_grid(3, 16, 14.0);
    ScalarField flat = make_field(g);
    for (auto& v : flat.v) v = 1.0;
    DensityMatrix uniform = new_state({1.0}, {flat});
    CHECK(norm_l2(hartree_potential(uniform)) < 1e-12);

    DensityMatrix rho = coulomb_rank2_state(g);
    ScalarField vh = hartree_potential(rho);
    for (const auto& v : vh.v) CHECK(v.imag() == 0.0);

    // density is additive over orbital terms, so the potential is too
    DensityMatrix a = new_state({0.6}, {rho.orbitals[0]});
    DensityMatrix b = new_state({0.4}, {rho.orbitals[1]});
    ScalarField sum = hartree_potential(a) + hartree_potential(b);
    CHECK(norm_l2(vh - sum) / norm_l2(vh) < 1e-12);
}

TEST_CASE("exchange: rank-1 self-interaction identity and support") {
    auto g = make_grid(1, 64, 16.0);
    ScalarField phi = gaussian_orbital(g, {0, 0, 0}, 0.7, {0.2, 0, 0});
    DensityMatrix pure = new_state({1.0}, {phi});
    ScalarField xphi = apply_exchange(pure, pure.orbitals[0]);
    ScalarField vh = hartree_potential(pure);
    ScalarField expect = make_field(g);
    for (std::size_t i = 0; i < expect.v.size(); ++i)
        expect.v[i] = vh.v[i].real() * pure.orbitals[0].v[i];
    CHECK(norm_l2(xphi - expect) / norm_l2(expect) < 1e-10);

    // rank structure: the output carries a factor phi(x), so it vanishes
    // wherever the concentrated orbital does
    std::mt19937 rng(11);
    ScalarField f = random_field(g, rng);
    axpy(-inner_product(pure.orbitals[0], f), pure.orbitals[0], f);
    ScalarField out = apply_exchange(pure, f);
    double phi_max = 0.0, out_max = 0.0;
    for (std::size_t i = 0; i < out.v.size(); ++i) {
        phi_max = std::max(phi_max, std::abs(pure.orbitals[0].v[i]));
        out_max = std::max(out_max, std::abs(out.v[i]));
    }
    for (std::size_t i = 0; i < out.v.size(); ++i)
        if (std::abs(pure.orbitals[0].v[i]) < 1e-12 * phi_max)
            CHECK(std::abs(out.v[i]) < 1e-10 * out_max);

    auto g2 = make_grid(1, 64, 12.0);
    CHECK_THROWS_AS(apply_exchange(pure, make_field(g2)), std::invalid_argument);
}

TEST_CASE("exchange: self-adjointness and linearity in the state") {
    auto g = make_grid(1, 64, 16.0);
    std::mt19937 rng(19);
    DensityMatrix rho = random_state(g, 3, rng);
    ScalarField f = random_field(g, rng), h = random_field(g, rng);
    const Complex lhs = inner_product(h, apply_exchange(rho, f));
    const Complex rhs = inner_product(apply_exchange(rho, h), f);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));

    // scaling the state scales the operator
    DensityMatrix scaled = rho;
    for (auto& l : scaled.occupations) l *= 2.5;
    ScalarField a = apply_exchange(scaled, f);
    ScalarField b = Complex(2.5, 0.0) * apply_exchange(rho, f);
    CHECK(norm_l2(a - b) / norm_l2(b) < 1e-12);

    // coupling parameter does the same
    ScalarField c = apply_exchange(rho, f, 2.5);
    CHECK(norm_l2(c - b) / norm_l2(b) < 1e-12);
}

TEST_CASE("exchange operator norm stays bounded relative to the state") {
    auto g = make_grid(1, 64, 16.0);
    std::mt19937 rng(53);
    double worst = 0.0;
    for (int trial = 0; trial < 20; ++trial) {
        DensityMatrix rho = random_state(g, 1 + trial % 4, rng);
        NormReport nr = norm_report(rho);
        ScalarField f = random_field(g, rng);
        const double ratio =
            norm_l2(apply_exchange(rho, f)) / (nr.z_norm * norm_l2(f));
        worst = std::max(worst, ratio);
        CHECK(std::isfinite(ratio));
    }
    CHECK(worst < 10.0);  // empirical boundedness; no sharp constant asserted
}

TEST_CASE("hamiltonian action: free limit, cancellation, self-adjointness") {
    auto g = make_grid(1, 64, 8.0 * M_PI);
    ScalarField pw = plane_wave(g, {4, 0, 0});
    DensityMatrix null_state = new_state({0.0}, {pw});
    MeanFieldPack pack0 = make_mean_field_pack(null_state);
    ScalarField hpw = apply_hamiltonian(pack0, pw);
    double err = 0.0;
    for (std::size_t i = 0; i < pw.v.size(); ++i)
        err = std::max(err, std::abs(hpw.v[i] - 0.5 * pw.v[i]));
    CHECK(err < 1e-12);

    auto g1 = make_grid(1, 64, 16.0);
    ScalarField phi = gaussian_orbital(g1, {0, 0, 0}, 1.0, {0, 0, 0});
    DensityMatrix pure = new_state({1.0}, {phi});
    MeanFieldPack pack = make_mean_field_pack(pure);
    ScalarField hphi = apply_hamiltonian(pack, pure.orbitals[0]);
    ScalarField kin = apply_multiplier(pure.orbitals[0], kinetic_multiplier(g1));
    CHECK(norm_l2(hphi - kin) / norm_l2(kin) < 1e-10);

    std::mt19937 rng(3);
    DensityMatrix rho = random_state(g1, 2, rng);
    MeanFieldPack packr = make_mean_field_pack(rho);
    ScalarField f = random_field(g1, rng), h = random_field(g1, rng);
    const Complex lhs = inner_product(h, apply_hamiltonian(packr, f));
    const Complex rhs = inner_product(apply_hamiltonian(packr, h), f);
    CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("stale mean-field pack is rejected") {
    auto g = make_grid(1, 64, 16.0);
    DensityMatrix rho = soft_rank2_state(g);
    MeanFieldPack pack = make_mean_field_pack(rho);
    CHECK_NOTHROW(apply_hamiltonian(pack, rho, rho.orbitals[0]));
    DensityMatrix other = free_evolve(rho, 0.05);
    CHECK_THROWS_AS(apply_hamiltonian(pack, other, other.orbitals[0]),
                    std::runtime_error);
}

TEST_CASE("nonlinear rhs: rank-1 vanishing, tracelessness, dense equivalence") {
    auto g = make_grid(1, 64, 16.0);
    ScalarField phi = gaussian_orbital(g, {0.3, 0, 0}, 0.9, {0.1, 0, 0});
    DensityMatrix pure = new_state({1.0}, {phi});
    FactorizedOperator f1 = nonlinear_rhs(pure);
    std::mt19937 rng(5);
    ScalarField probe = random_field(g, rng);
    CHECK(norm_l2(factorized_apply(f1, probe)) < 1e-10 * norm_l2(probe));

    DensityMatrix rho = soft_rank2_state(g);
    FactorizedOperator f2 = nonlinear_rhs(rho);
    CHECK(f2.rank() == 2 * rho.rank());
    CHECK(std::abs(factorized_trace(f2)) < 1e-10);
    CHECK(factorized_hermiticity_defect(f2) < 1e-10);

    auto g16 = make_grid(1, 16, 8.0);
    DensityMatrix small =
        new_state({0.6, 0.4}, {gaussian_orbital(g16, {-0.8, 0, 0}, 0.7, {0.4, 0, 0}),
                               gaussian_orbital(g16, {0.8, 0, 0}, 0.8, {-0.3, 0, 0})});
    const DenseMatrix reference = dense_nonlinear_rhs_kernel(small);
    const DenseMatrix actual = dense_factorized_kernel(nonlinear_rhs(small));
    CHECK((actual - reference).cwiseAbs().maxCoeff() <
          1e-10 * reference.cwiseAbs().maxCoeff() + 1e-14);
    CHECK((reference - reference.adjoint()).cwiseAbs().maxCoeff() <
          1e-10 * reference.cwiseAbs().maxCoeff());
}

TEST_CASE("potential energies: rank-1 equality, positivity, null state") {
    auto g = make_grid(1, 64, 16.0);
    ScalarField phi = gaussian_orbital(g, {0, 0, 0}, 1.0, {0, 0, 0});
    DensityMatrix pure = new_state({1.0}, {phi});
    auto [eh1, ex1] = potential_energies(pure);
    CHECK(std::abs(eh1 - ex1) < 1e-10);

    DensityMatrix rho = soft_rank2_state(g);
    auto [eh2, ex2] = potential_energies(rho);
    CHECK(eh2 - ex2 >= -1e-10);

    DensityMatrix null_state = new_state({0.0}, {phi});
    auto [eh3, ex3] = potential_energies(null_state);
    CHECK(eh3 == 0.0);
    CHECK(std::abs(ex3) < 1e-300);
}

TEST_CASE("potential energy positive over a randomized family") {
    auto g = make_grid(1, 64, 16.0);
    std::mt19937 rng(101);
    double min_epot = 1e9;
    for (int trial = 0; trial < 60; ++trial) {
        DensityMatrix rho = random_state(g, 1 + trial % 4, rng);
        auto [eh, ex] = potential_energies(rho);
        min_epot = std::min(min_epot, eh - ex);
    }
    CHECK(min_epot >= -1e-10);
}

TEST_CASE("exchange trace consistency against the dense double integral") {
    auto g = make_grid(1, 16, 8.0);
    DensityMatrix rho =
        new_state({0.6, 0.4}, {gaussian_orbital(g, {-0.8, 0, 0}, 0.7, {0.4, 0, 0}),
                               gaussian_orbital(g, {0.8, 0, 0}, 0.8, {0, 0, 0})});
    double orbitalwise = 0.0;
    for (int j = 0; j < rho.rank(); ++j)
        orbitalwise += rho.occupations[j] *
                       inner_product(rho.orbitals[j],
                                     apply_exchange(rho, rho.orbitals[j]))
                           .real();
    // (1/4pi) double integral of |rho(x,z)|^2 w(x-z)
    const DenseMatrix kernel = dense_kernel(rho);
    const DenseMatrix c = dense_interaction(g);
    double dblint = 0.0;
    const int n = g->points_per_axis();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            dblint += std::norm(kernel(i, j)) * c(i, j).real();
    dblint *= g->cell_volume();
    CHECK(orbitalwise == Catch::Approx(dblint).epsilon(1e-8));
}
