#pragma once

#include <string>
#include <vector>

#include "tdhf/propagate.hpp"
#include "tdhf/report.hpp"

namespace tdhf {

EnergyReport energy_report(const DensityMatrix& rho, double t,
                           double coupling = 1.0);

/// Fills traj.reports (one row per sample) using the trajectory's coupling.
void annotate(Trajectory& traj);

struct AuditTolerances {
    double trace = 1e-10;        // relative drift
    double trace_norm = 1e-10;   // relative drift
    double energy = 1e-6;        // relative drift
    double occupations = 1e-8;   // absolute drift per eigenvalue
};

struct AuditCheck {
    std::string name;
    double value = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct AuditSummary {
    std::vector<AuditCheck> checks;
    bool passed = true;
    std::vector<std::string> failures;
};

/// Max drifts of trace, trace norm, total energy and occupations over the
/// trajectory, judged against the given tolerances. Pure; throws on
/// trajectories with fewer than two samples.
AuditSummary conservation_audit(const Trajectory& traj,
                                const AuditTolerances& tol = {});

struct KineticBoundResult {
    bool applicable = false;  // requires a positive initial state
    bool passed = false;
    double min_lower_margin = 0.0;  // min over samples of e_kin - 0
    double min_upper_margin = 0.0;  // min over samples of e_tot(0) - e_kin
};

/// Two-sided bound 0 <= E_kin(t) <= E_tot(0), with 1e-8 absolute slack.
/// Not applicable (skipped) for states with signed occupations.
KineticBoundResult kinetic_bound_check(const Trajectory& traj);

struct LiebThirringCheck {
    double q = 0.0;
    double alpha = 0.0;     // (3 - q) / (2 q)
    double lhs = 0.0;       // ||n||_q
    double rhs_core = 0.0;  // trace_norm^alpha * e_kin_abs^(1-alpha)
    double ratio = 0.0;
};

/// Density-norm interpolation ratios; 3D only, q restricted to [1,3].
std::vector<LiebThirringCheck> lieb_thirring_scan(
    const DensityMatrix& rho, const std::vector<double>& q_list);

/// Both sides of the quadratic mean-field energy identity
/// int V^H n dx = int |grad V^H|^2 dx (3D, zero-mean potential convention).
std::pair<double, double> hartree_energy_identity(const DensityMatrix& rho,
                                                  double coupling = 1.0);

}  // namespace tdhf
