#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "tdhf/grid.hpp"

namespace tdhf {

/// Finite-rank Hermitian operator in diagonal representation: kernel
/// rho(x,y) = sum_j lambda_j phi_j(x) conj(phi_j(y)) with orthonormal
/// orbitals. Immutable after construction; build through new_state so the
/// orbitals are Loewdin-orthonormalized and validated.
struct DensityMatrix {
    GridPtr grid;
    std::vector<double> occupations;
    std::vector<ScalarField> orbitals;

    int rank() const { return static_cast<int>(occupations.size()); }
    bool positive() const;
};

/// Low-rank operator as kernel sum_m c_m left_m(x) conj(right_m(y)).
struct FactorizedOperator {
    GridPtr grid;
    std::vector<Complex> coefficients;
    std::vector<ScalarField> left;
    std::vector<ScalarField> right;

    int rank() const { return static_cast<int>(coefficients.size()); }
};

struct NormReport {
    double trace = 0.0;
    double trace_norm = 0.0;
    double z_norm = 0.0;
    double y_norm = 0.0;
    double kinetic_energy = 0.0;      // signed occupations
    double kinetic_energy_abs = 0.0;  // |occupations|, the trace-norm weight
};

/// Loewdin-orthonormalizes the raw orbitals and attaches occupations.
/// Throws if the raw Gram matrix is singular beyond 1e-12 (dependent inputs).
DensityMatrix new_state(const std::vector<double>& occupations,
                        const std::vector<ScalarField>& raw_orbitals);

/// n(x) = sum_j lambda_j |phi_j(x)|^2. Real; integrates to the trace.
ScalarField particle_density(const DensityMatrix& rho);

/// Integral-operator action (rho f)(x) = sum_j lambda_j phi_j(x) <phi_j, f>.
ScalarField apply_state(const DensityMatrix& rho, const ScalarField& f);

NormReport norm_report(const DensityMatrix& rho);

/// Eigen-decomposition within the orbital (or factor) span; occupations
/// sorted descending. The factorized overload requires a Hermitian kernel
/// (conjugate-symmetry defect <= 1e-8 relative) and throws otherwise.
std::pair<std::vector<double>, std::vector<ScalarField>> rediagonalize(
    const DensityMatrix& rho);
std::pair<std::vector<double>, std::vector<ScalarField>> rediagonalize(
    const FactorizedOperator& op);

/// Max-norm deviation of the orbital Gram matrix from the identity.
double gram_defect(const DensityMatrix& rho);

/// Content hash of occupations and orbital values (order-sensitive).
std::uint64_t state_fingerprint(const DensityMatrix& rho);

Complex factorized_trace(const FactorizedOperator& op);
ScalarField factorized_apply(const FactorizedOperator& op, const ScalarField& f);
/// Max-norm Hermiticity defect of the kernel, relative to its largest
/// coefficient scale, measured in the factor span.
double factorized_hermiticity_defect(const FactorizedOperator& op);
/// Conjugation by the free flow: both factor families evolve by e^{-i H0 t}.
FactorizedOperator factorized_free_evolve(const FactorizedOperator& op, double t);

/// Kernel value rho(x,z) at two flat node indices.
Complex kernel_value(const DensityMatrix& rho, std::size_t ix, std::size_t iz);

}  // namespace tdhf
