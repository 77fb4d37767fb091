#pragma once

#include <cstdint>
#include <utility>

#include "tdhf/state.hpp"

namespace tdhf {

/// Self-consistent potential data for one state: the (real) mean-field
/// potential plus the state itself, which defines the non-local exchange
/// kernel. Carries a content fingerprint so a pack cannot silently be used
/// with a state it was not built from.
struct MeanFieldPack {
    DensityMatrix state;
    ScalarField hartree;
    double coupling = 1.0;
    std::uint64_t fingerprint = 0;

    bool matches(const DensityMatrix& rho) const {
        return fingerprint == state_fingerprint(rho);
    }
};

/// V^H = coulomb_solve(particle_density(rho)), forced exactly real.
ScalarField hartree_potential(const DensityMatrix& rho, double coupling = 1.0);

/// Non-local exchange action:
/// (V^HF f)(x) = sum_j lambda_j phi_j(x) * coulomb_solve(conj(phi_j) f)(x).
ScalarField apply_exchange(const DensityMatrix& rho, const ScalarField& f,
                           double coupling = 1.0);

MeanFieldPack make_mean_field_pack(const DensityMatrix& rho,
                                   double coupling = 1.0);

/// Full Hamiltonian action H f = -1/2 lap f + V^H f - V^HF f.
ScalarField apply_hamiltonian(const MeanFieldPack& pack, const ScalarField& f);

/// Checked variant: throws if the pack was not built from rho (stale pack).
ScalarField apply_hamiltonian(const MeanFieldPack& pack, const DensityMatrix& rho,
                              const ScalarField& f);

/// Mean-field part only, W f = V^H f - V^HF f.
ScalarField apply_mean_field(const MeanFieldPack& pack, const ScalarField& f);

/// F(rho) = -i [V^H - V^HF, rho] in factorized form (rank 2N).
FactorizedOperator nonlinear_rhs(const DensityMatrix& rho, double coupling = 1.0);

/// (E_H, E_x) with E_H = 1/2 Tr(rho V^H), E_x = 1/2 Tr(rho V^HF).
std::pair<double, double> potential_energies(const DensityMatrix& rho,
                                             double coupling = 1.0);

}  // namespace tdhf
