#include "tdhf/propagate.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace tdhf {

namespace {

constexpr int kSeriesOrder = 4;

void check_finite(const DensityMatrix& rho, int step, double t) {
    for (int j = 0; j < rho.rank(); ++j) {
        if (!all_finite(rho.orbitals[j])) {
            std::ostringstream msg;
            msg << "propagation aborted: non-finite value in orbital " << j
                << " at step " << step << ", t = " << t
                << " (trace so far = " << norm_report(rho).trace << ")";
            throw std::runtime_error(msg.str());
        }
    }
}

/// phi + sum_{m=1..order} (-i dt)^m/m! W^m phi with a divergence guard.
template <class ApplyW>
ScalarField exp_series(const ApplyW& apply_w, double dt, const ScalarField& f) {
    ScalarField acc = f;
    ScalarField term = f;
    double prev_norm = norm_l2(term);
    for (int m = 1; m <= kSeriesOrder; ++m) {
        ScalarField wt = apply_w(term);
        const Complex scale(0.0, -dt / m);
        term = scale * wt;
        const double tn = norm_l2(term);
        if (m >= 2 && tn > prev_norm)
            throw std::runtime_error(
                "potential substep series diverges: step size too large for "
                "the mean-field strength");
        prev_norm = tn;
        for (std::size_t i = 0; i < acc.v.size(); ++i) acc.v[i] += term.v[i];
    }
    return acc;
}

DensityMatrix with_orbitals(const DensityMatrix& rho,
                            std::vector<ScalarField> orbs) {
    return DensityMatrix{rho.grid, rho.occupations, std::move(orbs)};
}

std::vector<ScalarField> half_kinetic(const DensityMatrix& rho, double dt) {
    std::vector<ScalarField> out;
    out.reserve(rho.rank());
    for (const auto& f : rho.orbitals) out.push_back(kinetic_phase(f, 0.5 * dt));
    return out;
}

// ---------------------------------------------------------------- Picard

/// Gauss-Legendre nodes/weights on [a,b] by Newton iteration.
void gauss_legendre(int k, double a, double b, std::vector<double>& x,
                    std::vector<double>& w) {
    x.assign(k, 0.0);
    w.assign(k, 0.0);
    for (int i = 0; i < (k + 1) / 2; ++i) {
        double z = std::cos(M_PI * (i + 0.75) / (k + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < k; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * z * p1 - j * p2) / (j + 1.0);
            }
            pp = k * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / pp;
            z -= dz;
            if (std::abs(dz) < 1e-15) break;
        }
        x[i] = z;
        x[k - 1 - i] = -z;
        w[i] = 2.0 / ((1.0 - z * z) * pp * pp);
        w[k - 1 - i] = w[i];
    }
    // map [-1,1] -> [a,b]; the flip makes the nodes increase
    std::vector<double> xs(k), ws(k);
    for (int i = 0; i < k; ++i) {
        xs[i] = 0.5 * (b - a) * (-x[i]) + 0.5 * (a + b);
        ws[i] = 0.5 * (b - a) * w[i];
    }
    x = std::move(xs);
    w = std::move(ws);
}

double lagrange_basis(const std::vector<double>& nodes, int j, double s) {
    double p = 1.0;
    for (std::size_t m = 0; m < nodes.size(); ++m)
        if (static_cast<int>(m) != j) p *= (s - nodes[m]) / (nodes[j] - nodes[m]);
    return p;
}

/// c_j = int_0^upto ell_j(s) ds, exact for the degree-(K-1) basis.
std::vector<double> partial_weights(const std::vector<double>& nodes,
                                    double upto) {
    const int k = static_cast<int>(nodes.size());
    std::vector<double> xi, wi;
    gauss_legendre(k / 2 + 1, 0.0, upto, xi, wi);
    std::vector<double> c(k, 0.0);
    for (int j = 0; j < k; ++j)
        for (std::size_t q = 0; q < xi.size(); ++q)
            c[j] += wi[q] * lagrange_basis(nodes, j, xi[q]);
    return c;
}

double state_trace_norm(const DensityMatrix& rho) {
    double s = 0.0;
    for (double l : rho.occupations) s += std::abs(l);
    return s;
}

/// Duhamel combination: G0(s) rho0 + sum_j c_j G0(s - s_j) F_j, recompressed.
DensityMatrix duhamel_combine(const DensityMatrix& rho0, double s,
                              const std::vector<FactorizedOperator>& fs,
                              const std::vector<double>& nodes,
                              const std::vector<double>& weights,
                              int rank_budget) {
    FactorizedOperator combined{rho0.grid, {}, {}, {}};
    for (int j = 0; j < rho0.rank(); ++j) {
        ScalarField ev = kinetic_phase(rho0.orbitals[j], s);
        combined.coefficients.push_back(Complex(rho0.occupations[j], 0.0));
        combined.left.push_back(ev);
        combined.right.push_back(std::move(ev));
    }
    for (std::size_t j = 0; j < fs.size(); ++j) {
        if (weights[j] == 0.0) continue;
        const double lag = s - nodes[j];
        for (int m = 0; m < fs[j].rank(); ++m) {
            combined.coefficients.push_back(weights[j] * fs[j].coefficients[m]);
            combined.left.push_back(kinetic_phase(fs[j].left[m], lag));
            combined.right.push_back(kinetic_phase(fs[j].right[m], lag));
        }
    }
    auto [vals, orbs] = rediagonalize(combined);
    // keep the rank_budget largest by magnitude, drop relative dust
    std::vector<int> order(vals.size());
    for (std::size_t i = 0; i < vals.size(); ++i) order[i] = static_cast<int>(i);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(vals[a]) > std::abs(vals[b]);
    });
    const double top = vals.empty() ? 0.0 : std::abs(vals[order[0]]);
    std::vector<double> occ;
    std::vector<ScalarField> kept;
    for (int i = 0; i < static_cast<int>(order.size()) && i < rank_budget; ++i) {
        const double v = vals[order[i]];
        if (std::abs(v) <= 1e-12 * top) break;
        occ.push_back(v);
        kept.push_back(std::move(orbs[order[i]]));
    }
    // sort the kept set descending by value to keep occupations canonical
    std::vector<int> o2(occ.size());
    for (std::size_t i = 0; i < occ.size(); ++i) o2[i] = static_cast<int>(i);
    std::sort(o2.begin(), o2.end(),
              [&](int a, int b) { return occ[a] > occ[b]; });
    std::vector<double> occ2;
    std::vector<ScalarField> kept2;
    for (int i : o2) {
        occ2.push_back(occ[i]);
        kept2.push_back(std::move(kept[i]));
    }
    return DensityMatrix{rho0.grid, std::move(occ2), std::move(kept2)};
}

struct WindowResult {
    DensityMatrix end_state;
    PicardWindowStats stats;
};

WindowResult picard_window(const DensityMatrix& rho0, double t_start, double w,
                           const PropagatorConfig& cfg, int rank_budget) {
    const int k = cfg.quadrature_nodes_per_step;
    std::vector<double> nodes, gl_w;
    gauss_legendre(k, 0.0, w, nodes, gl_w);
    std::vector<std::vector<double>> cij(k);
    for (int i = 0; i < k; ++i) cij[i] = partial_weights(nodes, nodes[i]);
    const std::vector<double> cend = partial_weights(nodes, w);

    const double coupling = cfg.interactions ? cfg.coupling : 0.0;
    const double scale = std::max(1.0, state_trace_norm(rho0));

    std::vector<DensityMatrix> cur;
    cur.reserve(k);
    for (int i = 0; i < k; ++i) cur.push_back(free_evolve(rho0, nodes[i]));

    PicardWindowStats stats{t_start, w, {}};
    bool converged = false;
    for (int it = 0; it < cfg.picard_max_iter; ++it) {
        std::vector<FactorizedOperator> fs;
        fs.reserve(k);
        for (int j = 0; j < k; ++j) fs.push_back(nonlinear_rhs(cur[j], coupling));
        std::vector<DensityMatrix> next;
        next.reserve(k);
        for (int i = 0; i < k; ++i)
            next.push_back(
                duhamel_combine(rho0, nodes[i], fs, nodes, cij[i], rank_budget));
        double d = 0.0;
        for (int i = 0; i < k; ++i)
            d = std::max(d, trace_norm_distance(next[i], cur[i]));
        stats.distances.push_back(d);
        cur = std::move(next);
        if (d < cfg.picard_tol * scale) {
            converged = true;
            break;
        }
        if (stats.distances.size() >= 2 &&
            d >= stats.distances[stats.distances.size() - 2]) {
            break;  // not contracting
        }
    }
    if (!converged) return WindowResult{rho0, std::move(stats)};

    std::vector<FactorizedOperator> fs;
    fs.reserve(k);
    for (int j = 0; j < k; ++j) fs.push_back(nonlinear_rhs(cur[j], coupling));
    WindowResult res{duhamel_combine(rho0, w, fs, nodes, cend, rank_budget),
                     std::move(stats)};
    return res;
}

}  // namespace

void PropagatorConfig::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("config: dt must be positive");
    if (!(t_final >= dt))
        throw std::invalid_argument("config: t_final must be at least dt");
    if (!(picard_tol > 0.0))
        throw std::invalid_argument("config: picard_tol must be positive");
    if (picard_max_iter < 1 || quadrature_nodes_per_step < 2)
        throw std::invalid_argument("config: iteration/quadrature counts too small");
    if (sample_stride < 1)
        throw std::invalid_argument("config: sample_stride must be >= 1");
    if (reorthonormalize_every < 0 || picard_max_halvings < 0)
        throw std::invalid_argument("config: negative counter");
}

DensityMatrix free_evolve(const DensityMatrix& rho, double t) {
    std::vector<ScalarField> orbs;
    orbs.reserve(rho.rank());
    for (const auto& f : rho.orbitals) orbs.push_back(kinetic_phase(f, t));
    return with_orbitals(rho, std::move(orbs));
}

DensityMatrix strang_step(const DensityMatrix& rho, double dt, bool interactions,
                          double coupling) {
    DensityMatrix cur = with_orbitals(rho, half_kinetic(rho, dt));
    if (interactions && coupling != 0.0) {
        const MeanFieldPack pack0 = make_mean_field_pack(cur, coupling);
        auto w0 = [&](const ScalarField& f) { return apply_mean_field(pack0, f); };
        std::vector<ScalarField> predicted;
        predicted.reserve(cur.rank());
        for (const auto& f : cur.orbitals)
            predicted.push_back(exp_series(w0, dt, f));
        // midpoint-consistent frozen potential: average of the packs at the
        // substep start and at the predicted substep end
        const MeanFieldPack pack1 = make_mean_field_pack(
            with_orbitals(cur, std::move(predicted)), coupling);
        auto wbar = [&](const ScalarField& f) {
            ScalarField a = apply_mean_field(pack0, f);
            ScalarField b = apply_mean_field(pack1, f);
            for (std::size_t i = 0; i < a.v.size(); ++i)
                a.v[i] = 0.5 * (a.v[i] + b.v[i]);
            return a;
        };
        std::vector<ScalarField> stepped;
        stepped.reserve(cur.rank());
        for (const auto& f : cur.orbitals) stepped.push_back(exp_series(wbar, dt, f));
        cur = with_orbitals(cur, std::move(stepped));
    }
    return with_orbitals(cur, half_kinetic(cur, dt));
}

Trajectory run_orbital(const DensityMatrix& initial, const PropagatorConfig& cfg) {
    cfg.validate();
    const int n_steps = static_cast<int>(std::floor(cfg.t_final / cfg.dt + 1e-9));
    Trajectory traj;
    traj.coupling = cfg.interactions ? cfg.coupling : 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(initial);

    DensityMatrix cur = initial;
    for (int step = 1; step <= n_steps; ++step) {
        cur = strang_step(cur, cfg.dt, cfg.interactions, cfg.coupling);
        if (cfg.reorthonormalize_every > 0 &&
            step % cfg.reorthonormalize_every == 0)
            cur = new_state(cur.occupations, cur.orbitals);
        check_finite(cur, step, step * cfg.dt);
        if (step % cfg.sample_stride == 0) {
            traj.times.push_back(step * cfg.dt);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

Trajectory picard_solve(const DensityMatrix& initial, double t_final,
                        const PropagatorConfig& cfg) {
    cfg.validate();
    if (!(t_final > 0.0))
        throw std::invalid_argument("picard_solve: t_final must be positive");
    const int rank_budget = 2 * initial.rank();

    Trajectory traj;
    traj.coupling = cfg.interactions ? cfg.coupling : 0.0;
    traj.times.push_back(0.0);
    traj.states.push_back(initial);

    DensityMatrix cur = initial;
    double t = 0.0;
    long window_count = 0;
    const double t_eps = 1e-9 * cfg.dt;  // guards against slivers of windows
    while (t < t_final - t_eps) {
        double w = std::min(cfg.dt, t_final - t);
        int halvings = 0;
        for (;;) {
            WindowResult res = picard_window(cur, t, w, cfg, rank_budget);
            const bool ok =
                !res.stats.distances.empty() &&
                res.stats.distances.back() <
                    cfg.picard_tol * std::max(1.0, state_trace_norm(cur));
            traj.picard_stats.push_back(res.stats);
            if (ok) {
                cur = std::move(res.end_state);
                t += w;
                ++window_count;
                break;
            }
            if (halvings >= cfg.picard_max_halvings)
                throw std::runtime_error(
                    "picard_solve: window too large, fixed-point iteration "
                    "does not contract");
            w *= 0.5;
            ++halvings;
        }
        check_finite(cur, static_cast<int>(window_count), t);
        if (window_count % cfg.sample_stride == 0 || t >= t_final - t_eps) {
            traj.times.push_back(t);
            traj.states.push_back(cur);
        }
    }
    return traj;
}

double trace_norm_distance(const DensityMatrix& a, const DensityMatrix& b) {
    if (a.grid.get() != b.grid.get())
        throw std::invalid_argument("trace_norm_distance: grid mismatch");
    // Orthonormal basis of the joint span by twice-reorthogonalized
    // Gram-Schmidt. Near-parallel orbital pairs leave a small but genuine
    // difference direction; an absolute residual cut keeps it representable,
    // so small distances come out first-order accurate.
    std::vector<ScalarField> basis;
    auto admit = [&basis](const ScalarField& f) {
        ScalarField r = f;
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& q : basis) axpy(-inner_product(q, r), q, r);
        const double nr = norm_l2(r);
        if (nr > 1e-14) basis.push_back(Complex(1.0 / nr, 0.0) * r);
    };
    for (const auto& f : a.orbitals) admit(f);
    for (const auto& f : b.orbitals) admit(f);

    const int m = static_cast<int>(basis.size());
    Eigen::MatrixXcd diff = Eigen::MatrixXcd::Zero(m, m);
    auto accumulate = [&](const DensityMatrix& rho, double sign) {
        for (int j = 0; j < rho.rank(); ++j) {
            Eigen::VectorXcd v(m);
            for (int i = 0; i < m; ++i)
                v(i) = inner_product(basis[i], rho.orbitals[j]);
            diff += sign * rho.occupations[j] * v * v.adjoint();
        }
    };
    accumulate(a, 1.0);
    accumulate(b, -1.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(
        Eigen::MatrixXcd(0.5 * (diff + diff.adjoint())));
    return es.eigenvalues().cwiseAbs().sum();
}

}  // namespace tdhf
