#pragma once

#include <vector>

#include "tdhf/meanfield.hpp"
#include "tdhf/report.hpp"
#include "tdhf/state.hpp"

namespace tdhf {

enum class Scheme { strang_orbital, picard_operator };

struct PropagatorConfig {
    double dt = 1e-3;       // step size; window length for the Picard scheme
    double t_final = 1.0;
    Scheme scheme = Scheme::strang_orbital;
    int picard_max_iter = 25;
    double picard_tol = 1e-11;
    int quadrature_nodes_per_step = 6;
    int reorthonormalize_every = 100;  // steps; 0 = never
    int sample_stride = 10;            // steps (windows for Picard) per sample
    bool interactions = true;
    double coupling = 1.0;
    int picard_max_halvings = 6;       // window halvings before giving up

    void validate() const;
};

/// Per-window Picard iteration record: trace-norm distances between
/// consecutive iterates, in order.
struct PicardWindowStats {
    double t_start = 0.0;
    double window = 0.0;
    std::vector<double> distances;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<DensityMatrix> states;
    std::vector<EnergyReport> reports;  // filled by diagnostics
    double coupling = 1.0;
    std::vector<PicardWindowStats> picard_stats;
};

/// G0(t): conjugation by e^{-i H0 t}; occupations unchanged, every tracked
/// norm preserved. A group: t of either sign composes additively.
DensityMatrix free_evolve(const DensityMatrix& rho, double t);

/// One symmetric split step: half kinetic phase, mean-field substep with the
/// potential frozen at a midpoint-consistent state (truncated exponential
/// series, order 4), half kinetic phase. Occupations are untouched.
/// Throws on series term growth (step too large for the potential strength).
DensityMatrix strang_step(const DensityMatrix& rho, double dt,
                          bool interactions = true, double coupling = 1.0);

/// Orbital-system propagation with periodic re-orthonormalization.
/// Aborts with a diagnostic message if a non-finite value appears.
Trajectory run_orbital(const DensityMatrix& initial, const PropagatorConfig& cfg);

/// Operator-level mild-solution propagation: fixed-point iteration of the
/// time-integral form on Gauss-Legendre collocation windows, iterates
/// recompressed to a rank budget of twice the initial rank. Windows that do
/// not contract are halved; past the halving budget this throws.
Trajectory picard_solve(const DensityMatrix& initial, double t_final,
                        const PropagatorConfig& cfg);

/// Trace norm of the difference of two states (computed in the joint span).
double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b);

}  // namespace tdhf
