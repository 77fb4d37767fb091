#include "tdhf/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace tdhf {

namespace {

std::vector<double> sorted_desc(std::vector<double> v) {
    std::sort(v.begin(), v.end(), std::greater<double>());
    return v;
}

std::vector<EnergyReport> reports_for(const Trajectory& traj) {
    if (!traj.reports.empty()) return traj.reports;
    std::vector<EnergyReport> out;
    out.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        out.push_back(energy_report(traj.states[i], traj.times[i], traj.coupling));
    return out;
}

}  // namespace

EnergyReport energy_report(const DensityMatrix& rho, double t, double coupling) {
    EnergyReport rep;
    rep.t = t;
    const NormReport norms = norm_report(rho);
    rep.trace = norms.trace;
    rep.trace_norm = norms.trace_norm;
    rep.e_kin = norms.kinetic_energy;
    rep.e_kin_abs = norms.kinetic_energy_abs;
    rep.z_norm = norms.z_norm;
    rep.y_norm = norms.y_norm;
    const auto [eh, ex] = potential_energies(rho, coupling);
    rep.e_hartree = eh;
    rep.e_exchange = ex;
    rep.e_pot = eh - ex;
    rep.e_tot = rep.e_kin + rep.e_pot;
    rep.gram_defect = gram_defect(rho);
    auto [vals, orbs] = rediagonalize(rho);
    (void)orbs;
    rep.min_eigenvalue = *std::min_element(vals.begin(), vals.end());
    const std::vector<double> stored = sorted_desc(rho.occupations);
    double drift = 0.0;
    for (std::size_t j = 0; j < stored.size(); ++j)
        drift = std::max(drift, std::abs(vals[j] - stored[j]));
    rep.occupation_drift = drift;
    return rep;
}

void annotate(Trajectory& traj) {
    traj.reports.clear();
    traj.reports.reserve(traj.states.size());
    for (std::size_t i = 0; i < traj.states.size(); ++i)
        traj.reports.push_back(
            energy_report(traj.states[i], traj.times[i], traj.coupling));
}

AuditSummary conservation_audit(const Trajectory& traj,
                                const AuditTolerances& tol) {
    if (traj.states.size() < 2)
        throw std::invalid_argument(
            "conservation_audit: need at least two samples");
    const std::vector<EnergyReport> reps = reports_for(traj);

    const double trace0 = reps.front().trace;
    const double tnorm0 = reps.front().trace_norm;
    const double etot0 = reps.front().e_tot;
    const std::vector<double> occ0 =
        sorted_desc(traj.states.front().occupations);
    const std::size_t n0 = occ0.size();

    double d_trace = 0.0, d_tnorm = 0.0, d_etot = 0.0, d_occ = 0.0;
    for (std::size_t i = 1; i < reps.size(); ++i) {
        d_trace = std::max(
            d_trace, std::abs(reps[i].trace - trace0) / std::max(std::abs(trace0), 1e-300));
        d_tnorm = std::max(
            d_tnorm, std::abs(reps[i].trace_norm - tnorm0) / std::max(std::abs(tnorm0), 1e-300));
        d_etot = std::max(
            d_etot, std::abs(reps[i].e_tot - etot0) / std::max(std::abs(etot0), 1e-300));
        auto [vals, orbs] = rediagonalize(traj.states[i]);
        (void)orbs;
        for (std::size_t j = 0; j < n0; ++j) {
            const double v = j < vals.size() ? vals[j] : 0.0;
            d_occ = std::max(d_occ, std::abs(v - occ0[j]));
        }
        for (std::size_t j = n0; j < vals.size(); ++j)
            d_occ = std::max(d_occ, std::abs(vals[j]));
    }

    AuditSummary out;
    auto add = [&out](const std::string& name, double value, double tolerance) {
        const bool ok = value <= tolerance;
        out.checks.push_back({name, value, tolerance, ok});
        if (!ok) {
            out.passed = false;
            out.failures.push_back(name);
        }
    };
    add("total-charge conservation (trace drift)", d_trace, tol.trace);
    add("trace-norm conservation", d_tnorm, tol.trace_norm);
    add("total-energy conservation", d_etot, tol.energy);
    add("occupation constancy", d_occ, tol.occupations);
    return out;
}

KineticBoundResult kinetic_bound_check(const Trajectory& traj) {
    KineticBoundResult res;
    if (traj.states.empty() || !traj.states.front().positive()) return res;
    res.applicable = true;
    const std::vector<EnergyReport> reps = reports_for(traj);
    const double etot0 = reps.front().e_tot;
    res.min_lower_margin = reps.front().e_kin;
    res.min_upper_margin = etot0 - reps.front().e_kin;
    for (const auto& r : reps) {
        res.min_lower_margin = std::min(res.min_lower_margin, r.e_kin);
        res.min_upper_margin = std::min(res.min_upper_margin, etot0 - r.e_kin);
    }
    const double slack = 1e-8;
    res.passed = res.min_lower_margin >= -slack && res.min_upper_margin >= -slack;
    return res;
}

std::vector<LiebThirringCheck> lieb_thirring_scan(
    const DensityMatrix& rho, const std::vector<double>& q_list) {
    if (rho.grid->dim() != 3)
        throw std::invalid_argument(
            "lieb_thirring_scan: exponents are specific to 3D grids");
    const NormReport norms = norm_report(rho);
    const ScalarField n = particle_density(rho);
    std::vector<LiebThirringCheck> out;
    out.reserve(q_list.size());
    for (double q : q_list) {
        if (q < 1.0 || q > 3.0)
            throw std::invalid_argument("lieb_thirring_scan: q outside [1,3]");
        LiebThirringCheck c;
        c.q = q;
        c.alpha = (3.0 - q) / (2.0 * q);
        double acc = 0.0;
        for (const auto& v : n.v) acc += std::pow(std::abs(v.real()), q);
        c.lhs = std::pow(acc * rho.grid->cell_volume(), 1.0 / q);
        c.rhs_core = std::pow(norms.trace_norm, c.alpha) *
                     std::pow(norms.kinetic_energy_abs, 1.0 - c.alpha);
        c.ratio = c.lhs / c.rhs_core;
        out.push_back(c);
    }
    return out;
}

std::pair<double, double> hartree_energy_identity(const DensityMatrix& rho,
                                                  double coupling) {
    const ScalarField vh = hartree_potential(rho, coupling);
    const ScalarField n = particle_density(rho);
    double lhs = 0.0;
    for (std::size_t i = 0; i < n.v.size(); ++i)
        lhs += vh.v[i].real() * n.v[i].real();
    lhs *= rho.grid->cell_volume() * coupling;
    const double rhs = gradient_norm_sq(vh);
    return {lhs, rhs};
}

}  // namespace tdhf
