#include "tdhf/state.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace tdhf {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Eigen::Map<const Eigen::VectorXcd> as_vec(const ScalarField& f) {
    return {f.v.data(), static_cast<Eigen::Index>(f.v.size())};
}

MatrixXcd gram(const std::vector<const ScalarField*>& fs) {
    const int m = static_cast<int>(fs.size());
    const double dv = fs.empty() ? 0.0 : fs[0]->grid->cell_volume();
    MatrixXcd g(m, m);
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            g(i, j) = dv * as_vec(*fs[i]).dot(as_vec(*fs[j]));
            g(j, i) = std::conj(g(i, j));
        }
    }
    return g;
}

MatrixXcd gram(const std::vector<ScalarField>& fs) {
    std::vector<const ScalarField*> p;
    p.reserve(fs.size());
    for (const auto& f : fs) p.push_back(&f);
    return gram(p);
}

/// G^{+-1/2} through the spectral decomposition; throws if G is singular
/// beyond reltol.
MatrixXcd matrix_power_half(const MatrixXcd& g, int sign, double reltol) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g);
    const VectorXd w = es.eigenvalues();
    const double wmax = w.maxCoeff();
    if (w.minCoeff() <= reltol * wmax)
        throw std::invalid_argument("orbital set is (near-)linearly dependent");
    VectorXd d(w.size());
    for (int i = 0; i < w.size(); ++i)
        d(i) = sign > 0 ? std::sqrt(w(i)) : 1.0 / std::sqrt(w(i));
    return es.eigenvectors() * d.asDiagonal() * es.eigenvectors().adjoint();
}

std::vector<ScalarField> combine(const std::vector<const ScalarField*>& fs,
                                 const MatrixXcd& coef) {
    // out_j = sum_f fs[f] * coef(f, j)
    std::vector<ScalarField> out;
    out.reserve(coef.cols());
    for (int j = 0; j < coef.cols(); ++j) {
        ScalarField acc = make_field(fs[0]->grid);
        for (int f = 0; f < coef.rows(); ++f)
            axpy(coef(f, j), *fs[f], acc);
        out.push_back(std::move(acc));
    }
    return out;
}

struct SmallRep {
    MatrixXcd projected;             // operator in an orthonormal span basis
    std::vector<ScalarField> basis;  // the orthonormal basis fields
    double scale = 0.0;              // coefficient scale for relative defects
};

/// Orthonormal basis of the factor span by twice-reorthogonalized
/// Gram-Schmidt with an absolute residual cut. Near-parallel factors leave
/// small but genuine difference directions; this keeps them representable
/// (the eigen-decomposed Gram route would truncate them).
std::vector<ScalarField> span_basis(const std::vector<const ScalarField*>& fs) {
    std::vector<ScalarField> basis;
    for (const auto* f : fs) {
        const double fn = norm_l2(*f);
        if (fn < 1e-200) continue;
        ScalarField r = Complex(1.0 / fn, 0.0) * (*f);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) axpy(-inner_product(q, r), q, r);
        const double rn = norm_l2(r);
        if (rn > 1e-14) basis.push_back(Complex(1.0 / rn, 0.0) * r);
    }
    return basis;
}

/// Project a factorized kernel onto an orthonormal basis of its factor span.
SmallRep project_to_span(const FactorizedOperator& op) {
    const int m = op.rank();
    std::vector<const ScalarField*> fs;
    fs.reserve(2 * m);
    for (const auto& f : op.left) fs.push_back(&f);
    for (const auto& f : op.right) fs.push_back(&f);
    SmallRep rep;
    rep.basis = span_basis(fs);
    const int r = static_cast<int>(rep.basis.size());
    MatrixXcd sl(r, m), sr(r, m);
    for (int a = 0; a < r; ++a)
        for (int i = 0; i < m; ++i) {
            sl(a, i) = inner_product(rep.basis[a], op.left[i]);
            sr(a, i) = inner_product(rep.basis[a], op.right[i]);
        }
    Eigen::VectorXcd c(m);
    for (int i = 0; i < m; ++i) c(i) = op.coefficients[i];
    rep.projected = sl * c.asDiagonal() * sr.adjoint();
    double s = 0.0;
    for (const auto& cc : op.coefficients) s = std::max(s, std::abs(cc));
    rep.scale = std::max(s, rep.projected.cwiseAbs().maxCoeff());
    return rep;
}

std::pair<std::vector<double>, std::vector<ScalarField>> eig_sorted(
    const MatrixXcd& herm, const std::vector<ScalarField>& basis) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(herm);
    const int r = static_cast<int>(herm.rows());
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });
    MatrixXcd u(r, r);
    std::vector<double> vals(r);
    for (int j = 0; j < r; ++j) {
        vals[j] = es.eigenvalues()(order[j]);
        u.col(j) = es.eigenvectors().col(order[j]);
    }
    std::vector<const ScalarField*> bp;
    bp.reserve(basis.size());
    for (const auto& b : basis) bp.push_back(&b);
    return {vals, combine(bp, u)};
}

}  // namespace

bool DensityMatrix::positive() const {
    return std::all_of(occupations.begin(), occupations.end(),
                       [](double l) { return l >= 0.0; });
}

DensityMatrix new_state(const std::vector<double>& occupations,
                        const std::vector<ScalarField>& raw_orbitals) {
    if (occupations.empty() || occupations.size() != raw_orbitals.size())
        throw std::invalid_argument(
            "new_state: need equally many occupations and orbitals");
    const GridPtr grid = raw_orbitals.front().grid;
    for (const auto& f : raw_orbitals) {
        if (f.grid.get() != grid.get())
            throw std::invalid_argument("new_state: orbitals on different grids");
        if (!all_finite(f) || norm_l2(f) < 1e-14)
            throw std::invalid_argument("new_state: zero or non-finite orbital");
    }
    for (double l : occupations)
        if (!std::isfinite(l))
            throw std::invalid_argument("new_state: non-finite occupation");

    const MatrixXcd g = gram(raw_orbitals);
    const MatrixXcd s = matrix_power_half(g, -1, 1e-12);
    std::vector<const ScalarField*> fs;
    for (const auto& f : raw_orbitals) fs.push_back(&f);
    return DensityMatrix{grid, occupations, combine(fs, s)};
}

ScalarField particle_density(const DensityMatrix& rho) {
    ScalarField n = make_field(rho.grid);
    for (int j = 0; j < rho.rank(); ++j) {
        const double l = rho.occupations[j];
        const auto& v = rho.orbitals[j].v;
        for (std::size_t i = 0; i < n.v.size(); ++i)
            n.v[i] += l * std::norm(v[i]);
    }
    return n;
}

ScalarField apply_state(const DensityMatrix& rho, const ScalarField& f) {
    if (f.grid.get() != rho.grid.get())
        throw std::invalid_argument("apply_state: grid mismatch");
    ScalarField out = make_field(rho.grid);
    for (int j = 0; j < rho.rank(); ++j)
        axpy(rho.occupations[j] * inner_product(rho.orbitals[j], f),
             rho.orbitals[j], out);
    return out;
}

NormReport norm_report(const DensityMatrix& rho) {
    NormReport rep;
    const int n = rho.rank();
    Eigen::VectorXd lam(n);
    for (int j = 0; j < n; ++j) lam(j) = rho.occupations[j];

    for (int j = 0; j < n; ++j) {
        const double nj = norm_l2(rho.orbitals[j]);
        rep.trace += lam(j) * nj * nj;
        const double gns = gradient_norm_sq(rho.orbitals[j]);
        rep.kinetic_energy += 0.5 * lam(j) * gns;
        rep.kinetic_energy_abs += 0.5 * std::abs(lam(j)) * gns;
    }

    // trace norm = sum |eig(G^{1/2} Lam G^{1/2})| in the orbital span
    {
        const MatrixXcd g = gram(rho.orbitals);
        const MatrixXcd gh = matrix_power_half(g, +1, 1e-15);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
            MatrixXcd(gh * lam.asDiagonal() * gh.adjoint()));
        rep.trace_norm = es.eigenvalues().cwiseAbs().sum();
    }

    // z: trace norm of H0^{1/2} rho H0^{1/2}, factors psi_j = H0^{1/2} phi_j
    {
        const auto mult = half_kinetic_multiplier(rho.grid);
        std::vector<ScalarField> psi;
        psi.reserve(n);
        for (const auto& f : rho.orbitals) psi.push_back(apply_multiplier(f, mult));
        const MatrixXcd g = gram(psi);
        Eigen::SelfAdjointEigenSolver<MatrixXcd> gev(g);
        Eigen::VectorXd w = gev.eigenvalues().cwiseMax(0.0);
        const MatrixXcd gh = gev.eigenvectors() *
                             w.cwiseSqrt().asDiagonal() *
                             gev.eigenvectors().adjoint();
        Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
            MatrixXcd(gh * lam.asDiagonal() * gh.adjoint()));
        rep.z_norm = rep.trace_norm + es.eigenvalues().cwiseAbs().sum();
    }

    // y: trace norm of H0 rho from singular values of the factorized form
    {
        const auto mult = kinetic_multiplier(rho.grid);
        std::vector<ScalarField> h0phi;
        h0phi.reserve(n);
        for (const auto& f : rho.orbitals)
            h0phi.push_back(apply_multiplier(f, mult));
        auto half = [](const MatrixXcd& g) {
            Eigen::SelfAdjointEigenSolver<MatrixXcd> ev(g);
            Eigen::VectorXd w = ev.eigenvalues().cwiseMax(0.0);
            return MatrixXcd(ev.eigenvectors() * w.cwiseSqrt().asDiagonal() *
                             ev.eigenvectors().adjoint());
        };
        const MatrixXcd al = half(gram(h0phi));
        const MatrixXcd ar = half(gram(rho.orbitals));
        Eigen::JacobiSVD<MatrixXcd> svd(al * lam.asDiagonal() * ar.adjoint());
        rep.y_norm = rep.trace_norm + svd.singularValues().sum();
    }
    return rep;
}

std::pair<std::vector<double>, std::vector<ScalarField>> rediagonalize(
    const DensityMatrix& rho) {
    const MatrixXcd g = gram(rho.orbitals);
    const MatrixXcd gh = matrix_power_half(g, +1, 1e-15);
    const MatrixXcd gmh = matrix_power_half(g, -1, 1e-15);
    Eigen::VectorXd lam(rho.rank());
    for (int j = 0; j < rho.rank(); ++j) lam(j) = rho.occupations[j];

    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(
        MatrixXcd(gh * lam.asDiagonal() * gh.adjoint()));
    const int r = rho.rank();
    std::vector<int> order(r);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return es.eigenvalues()(a) > es.eigenvalues()(b);
    });
    MatrixXcd u(r, r);
    std::vector<double> vals(r);
    for (int j = 0; j < r; ++j) {
        vals[j] = es.eigenvalues()(order[j]);
        u.col(j) = es.eigenvectors().col(order[j]);
    }
    std::vector<const ScalarField*> fs;
    for (const auto& f : rho.orbitals) fs.push_back(&f);
    return {vals, combine(fs, gmh * u)};
}

std::pair<std::vector<double>, std::vector<ScalarField>> rediagonalize(
    const FactorizedOperator& op) {
    SmallRep rep = project_to_span(op);
    const double defect =
        (rep.projected - rep.projected.adjoint()).cwiseAbs().maxCoeff();
    if (defect > 1e-8 * std::max(rep.scale, 1e-300))
        throw std::invalid_argument(
            "rediagonalize: kernel is not Hermitian within tolerance");
    const MatrixXcd herm = 0.5 * (rep.projected + rep.projected.adjoint());
    return eig_sorted(herm, rep.basis);
}

double gram_defect(const DensityMatrix& rho) {
    const MatrixXcd g = gram(rho.orbitals);
    return (g - MatrixXcd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
}

std::uint64_t state_fingerprint(const DensityMatrix& rho) {
    std::uint64_t h = 1469598103934665603ull;
    auto mix = [&h](const void* data, std::size_t bytes) {
        const auto* p = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < bytes; ++i) {
            h ^= p[i];
            h *= 1099511628211ull;
        }
    };
    mix(rho.occupations.data(), rho.occupations.size() * sizeof(double));
    for (const auto& f : rho.orbitals)
        mix(f.v.data(), f.v.size() * sizeof(Complex));
    return h;
}

Complex factorized_trace(const FactorizedOperator& op) {
    Complex acc(0.0, 0.0);
    for (int m = 0; m < op.rank(); ++m)
        acc += op.coefficients[m] * inner_product(op.right[m], op.left[m]);
    return acc;
}

ScalarField factorized_apply(const FactorizedOperator& op, const ScalarField& f) {
    ScalarField out = make_field(op.grid);
    for (int m = 0; m < op.rank(); ++m)
        axpy(op.coefficients[m] * inner_product(op.right[m], f), op.left[m], out);
    return out;
}

double factorized_hermiticity_defect(const FactorizedOperator& op) {
    SmallRep rep = project_to_span(op);
    const double defect =
        (rep.projected - rep.projected.adjoint()).cwiseAbs().maxCoeff();
    return defect / std::max(rep.scale, 1e-300);
}

FactorizedOperator factorized_free_evolve(const FactorizedOperator& op, double t) {
    FactorizedOperator out{op.grid, op.coefficients, {}, {}};
    out.left.reserve(op.rank());
    out.right.reserve(op.rank());
    for (int m = 0; m < op.rank(); ++m) {
        out.left.push_back(kinetic_phase(op.left[m], t));
        out.right.push_back(kinetic_phase(op.right[m], t));
    }
    return out;
}

Complex kernel_value(const DensityMatrix& rho, std::size_t ix, std::size_t iz) {
    Complex acc(0.0, 0.0);
    for (int j = 0; j < rho.rank(); ++j)
        acc += rho.occupations[j] * rho.orbitals[j].v[ix] *
               std::conj(rho.orbitals[j].v[iz]);
    return acc;
}

}  // namespace tdhf
