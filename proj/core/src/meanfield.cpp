#include "tdhf/meanfield.hpp"

#include <cmath>
#include <stdexcept>

namespace tdhf {

ScalarField hartree_potential(const DensityMatrix& rho, double coupling) {
    ScalarField v = coulomb_solve(particle_density(rho));
    for (auto& x : v.v) x = Complex(coupling * x.real(), 0.0);
    return v;
}

ScalarField apply_exchange(const DensityMatrix& rho, const ScalarField& f,
                           double coupling) {
    if (f.grid.get() != rho.grid.get())
        throw std::invalid_argument("apply_exchange: grid mismatch");
    ScalarField out = make_field(rho.grid);
    ScalarField prod = make_field(rho.grid);
    for (int j = 0; j < rho.rank(); ++j) {
        const auto& p = rho.orbitals[j].v;
        for (std::size_t i = 0; i < prod.v.size(); ++i)
            prod.v[i] = std::conj(p[i]) * f.v[i];
        const ScalarField u = coulomb_solve(prod);
        const Complex scale(coupling * rho.occupations[j], 0.0);
        for (std::size_t i = 0; i < out.v.size(); ++i)
            out.v[i] += scale * p[i] * u.v[i];
    }
    return out;
}

MeanFieldPack make_mean_field_pack(const DensityMatrix& rho, double coupling) {
    return MeanFieldPack{rho, hartree_potential(rho, coupling), coupling,
                         state_fingerprint(rho)};
}

ScalarField apply_mean_field(const MeanFieldPack& pack, const ScalarField& f) {
    ScalarField out = apply_exchange(pack.state, f, -pack.coupling);
    for (std::size_t i = 0; i < out.v.size(); ++i)
        out.v[i] += pack.hartree.v[i].real() * f.v[i];
    return out;
}

ScalarField apply_hamiltonian(const MeanFieldPack& pack, const ScalarField& f) {
    ScalarField out = apply_multiplier(f, kinetic_multiplier(f.grid));
    ScalarField w = apply_mean_field(pack, f);
    for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += w.v[i];
    return out;
}

ScalarField apply_hamiltonian(const MeanFieldPack& pack, const DensityMatrix& rho,
                              const ScalarField& f) {
    if (!pack.matches(rho))
        throw std::runtime_error(
            "apply_hamiltonian: stale mean-field pack (state fingerprint mismatch)");
    return apply_hamiltonian(pack, f);
}

FactorizedOperator nonlinear_rhs(const DensityMatrix& rho, double coupling) {
    const MeanFieldPack pack = make_mean_field_pack(rho, coupling);
    FactorizedOperator op{rho.grid, {}, {}, {}};
    const int n = rho.rank();
    op.coefficients.reserve(2 * n);
    op.left.reserve(2 * n);
    op.right.reserve(2 * n);
    for (int j = 0; j < n; ++j) {
        ScalarField wphi = apply_mean_field(pack, rho.orbitals[j]);
        // -i (W rho - rho W): kernels (W phi)(x) conj(phi(y)) and
        // phi(x) conj((W phi)(y))
        op.coefficients.push_back(Complex(0.0, -rho.occupations[j]));
        op.left.push_back(wphi);
        op.right.push_back(rho.orbitals[j]);
        op.coefficients.push_back(Complex(0.0, rho.occupations[j]));
        op.left.push_back(rho.orbitals[j]);
        op.right.push_back(std::move(wphi));
    }
    return op;
}

std::pair<double, double> potential_energies(const DensityMatrix& rho,
                                             double coupling) {
    const ScalarField vh = hartree_potential(rho, coupling);
    const ScalarField n = particle_density(rho);
    double eh = 0.0;
    for (std::size_t i = 0; i < n.v.size(); ++i)
        eh += vh.v[i].real() * n.v[i].real();
    eh *= 0.5 * rho.grid->cell_volume();
    double ex = 0.0;
    for (int j = 0; j < rho.rank(); ++j)
        ex += 0.5 * rho.occupations[j] *
              inner_product(rho.orbitals[j],
                            apply_exchange(rho, rho.orbitals[j], coupling))
                  .real();
    return {eh, ex};
}

}  // namespace tdhf
