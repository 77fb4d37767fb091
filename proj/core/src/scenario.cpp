#include "tdhf/scenario.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace tdhf {

namespace {

using nlohmann::json;

std::uint64_t fnv1a64(const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    std::uint64_t h = 1469598103934665603ull;
    for (std::size_t i = 0; i < bytes; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

std::array<double, 3> parse_vec3(const json& j, const char* what) {
    if (!j.is_array() || j.size() > 3)
        throw ScenarioError(std::string(what) + " must be an array of <= 3 numbers");
    std::array<double, 3> out{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < j.size(); ++i) out[i] = j[i].get<double>();
    return out;
}

Scheme parse_scheme(const std::string& s) {
    if (s == "strang" || s == "strang_orbital") return Scheme::strang_orbital;
    if (s == "picard" || s == "picard_operator") return Scheme::picard_operator;
    throw ScenarioError("unknown scheme: " + s);
}

/// Smallest z with dim * erfc(z / sqrt(2)) <= target, by bisection.
double tail_z(double target, int dim) {
    double lo = 0.5, hi = 12.0;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (dim * std::erfc(mid / std::sqrt(2.0)) > target)
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

void write_bytes(const std::filesystem::path& path, const void* data,
                 std::size_t bytes) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open for writing: " + path.string());
    os.write(static_cast<const char*>(data), static_cast<std::streamsize>(bytes));
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("config parse error: ") + e.what());
    }
    try {
        Scenario sc;
        sc.schema_version = j.at("schema_version").get<int>();
        if (sc.schema_version != 1)
            throw ScenarioError("unsupported schema_version");
        const auto& g = j.at("grid");
        sc.dim = g.at("dim").get<int>();
        sc.points_per_axis = g.at("points_per_axis").get<int>();
        sc.box_length = g.at("box_length").get<double>();
        for (const auto& o : j.at("orbitals")) {
            OrbitalSpec spec;
            spec.kind = o.value("kind", "gaussian");
            if (spec.kind != "gaussian" && spec.kind != "plane_modulated_gaussian")
                throw ScenarioError("unknown orbital kind: " + spec.kind);
            spec.center = parse_vec3(o.at("center"), "center");
            spec.sigma = o.at("sigma").get<double>();
            if (!(spec.sigma > 0.0)) throw ScenarioError("sigma must be positive");
            if (o.contains("momentum"))
                spec.momentum = parse_vec3(o.at("momentum"), "momentum");
            spec.occupation = o.at("occupation").get<double>();
            if (!std::isfinite(spec.occupation))
                throw ScenarioError("occupation must be finite");
            sc.orbitals.push_back(spec);
        }
        if (sc.orbitals.empty())
            throw ScenarioError("at least one orbital is required");
        if (j.contains("interaction")) {
            sc.interactions = j["interaction"].value("enabled", true);
            sc.coupling = j["interaction"].value("coupling", 1.0);
        }
        if (j.contains("propagator")) {
            const auto& p = j["propagator"];
            sc.propagator.scheme = parse_scheme(p.value("scheme", "strang"));
            sc.propagator.dt = p.value("dt", sc.propagator.dt);
            sc.propagator.t_final = p.value("t_final", sc.propagator.t_final);
            sc.propagator.picard_max_iter =
                p.value("picard_max_iter", sc.propagator.picard_max_iter);
            sc.propagator.picard_tol =
                p.value("picard_tol", sc.propagator.picard_tol);
            sc.propagator.quadrature_nodes_per_step = p.value(
                "quadrature_nodes_per_step", sc.propagator.quadrature_nodes_per_step);
            sc.propagator.reorthonormalize_every = p.value(
                "reorthonormalize_every", sc.propagator.reorthonormalize_every);
        }
        if (j.contains("output")) {
            sc.output.sample_stride = j["output"].value("sample_stride", 10);
            sc.output.snapshot_stride = j["output"].value("snapshot_stride", 0);
            sc.output.directory = j["output"].value("directory", "");
            if (sc.output.sample_stride < 1 || sc.output.snapshot_stride < 0)
                throw ScenarioError("invalid output strides");
        }
        if (j.contains("audit")) {
            const auto& a = j["audit"];
            sc.audit.trace = a.value("trace", sc.audit.trace);
            sc.audit.trace_norm = a.value("trace_norm", sc.audit.trace_norm);
            sc.audit.energy = a.value("energy", sc.audit.energy);
            sc.audit.occupations = a.value("occupations", sc.audit.occupations);
        }
        sc.deterministic = j.value("deterministic", true);
        return sc;
    } catch (const json::exception& e) {
        throw ScenarioError(std::string("config field error: ") + e.what());
    }
}

Scenario load_scenario(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ScenarioError("cannot read config: " + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse_scenario(ss.str());
}

ScalarField gaussian_orbital(GridPtr grid, const std::array<double, 3>& center,
                             double sigma,
                             const std::array<double, 3>& momentum) {
    ScalarField f = make_field(grid);
    const double inv4s2 = 1.0 / (4.0 * sigma * sigma);
    for (std::size_t i = 0; i < f.v.size(); ++i) {
        const auto x = grid->node_coordinates(i);
        double r2 = 0.0, phase = 0.0;
        for (int a = 0; a < grid->dim(); ++a) {
            const double d = x[a] - center[a];
            r2 += d * d;
            phase += momentum[a] * x[a];
        }
        const double amp = std::exp(-r2 * inv4s2);
        f.v[i] = Complex(amp * std::cos(phase), amp * std::sin(phase));
    }
    const double nrm = norm_l2(f);
    for (auto& v : f.v) v /= nrm;
    return f;
}

DensityMatrix build_initial_state(const Scenario& sc, GridPtr grid) {
    const double L = grid->box_length();
    const int dim = grid->dim();
    double suggested = 0.0;
    for (const auto& spec : sc.orbitals) {
        double inside = 1.0;
        double cmax = 0.0;
        for (int a = 0; a < dim; ++a) {
            const double c = spec.center[a];
            cmax = std::max(cmax, std::abs(c));
            const double zp = (0.5 * L - c) / (spec.sigma * std::sqrt(2.0));
            const double zm = (0.5 * L + c) / (spec.sigma * std::sqrt(2.0));
            inside *= 1.0 - 0.5 * std::erfc(zp) - 0.5 * std::erfc(zm);
        }
        const double outside = 1.0 - inside;
        if (outside > 1e-8) {
            const double z = tail_z(1e-8, dim);
            suggested = std::max(suggested, 2.0 * (cmax + z * spec.sigma));
        }
    }
    if (suggested > 0.0) {
        std::ostringstream msg;
        msg << "box too small: more than 1e-8 of an orbital's mass lies "
               "outside; use box_length >= "
            << std::ceil(suggested * 10.0) / 10.0;
        throw ScenarioError(msg.str());
    }

    std::vector<double> occ;
    std::vector<ScalarField> orbs;
    for (const auto& spec : sc.orbitals) {
        occ.push_back(spec.occupation);
        orbs.push_back(gaussian_orbital(grid, spec.center, spec.sigma,
                                        spec.momentum));
    }
    return new_state(occ, orbs);
}

RunResult run_scenario(const Scenario& sc, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const fs::path out(out_dir.empty() ? sc.output.directory : out_dir);
    if (out.empty())
        throw ScenarioError("no output directory given (CLI --out or output.directory)");
    fs::create_directories(out);

    GridPtr grid = make_grid(sc.dim, sc.points_per_axis, sc.box_length);
    const DensityMatrix initial = build_initial_state(sc, grid);

    PropagatorConfig cfg = sc.propagator;
    cfg.interactions = sc.interactions;
    cfg.coupling = sc.coupling;
    cfg.sample_stride = sc.output.sample_stride;

    Trajectory traj = cfg.scheme == Scheme::picard_operator
                          ? picard_solve(initial, cfg.t_final, cfg)
                          : run_orbital(initial, cfg);
    annotate(traj);

    // diagnostics.csv: fixed column order, 17 significant digits
    const fs::path csv_path = out / "diagnostics.csv";
    {
        std::FILE* fp = std::fopen(csv_path.string().c_str(), "w");
        if (!fp) throw std::runtime_error("cannot write " + csv_path.string());
        std::fputs(
            "t,trace,trace_norm,e_kin,e_hartree,e_exchange,e_pot,e_tot,"
            "z_norm,y_norm,gram_defect,occupation_drift,min_eigenvalue\n",
            fp);
        for (const auto& r : traj.reports)
            std::fprintf(fp,
                         "%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,%.16e,"
                         "%.16e,%.16e,%.16e,%.16e,%.16e\n",
                         r.t, r.trace, r.trace_norm, r.e_kin, r.e_hartree,
                         r.e_exchange, r.e_pot, r.e_tot, r.z_norm, r.y_norm,
                         r.gram_defect, r.occupation_drift, r.min_eigenvalue);
        std::fclose(fp);
    }

    // density snapshots: flat little-endian float64, row-major node order
    if (sc.output.snapshot_stride > 0) {
        for (std::size_t s = 0; s < traj.states.size();
             s += sc.output.snapshot_stride) {
            const ScalarField n = particle_density(traj.states[s]);
            std::vector<double> payload(n.v.size());
            for (std::size_t i = 0; i < n.v.size(); ++i)
                payload[i] = n.v[i].real();
            char name[64];
            std::snprintf(name, sizeof name, "density_%06zu.f64", s);
            const std::size_t bytes = payload.size() * sizeof(double);
            write_bytes(out / name, payload.data(), bytes);
            char hex[32];
            std::snprintf(hex, sizeof hex, "fnv1a64:%016llx",
                          static_cast<unsigned long long>(
                              fnv1a64(payload.data(), bytes)));
            json side = {
                {"schema_version", 1},
                {"time", traj.times[s]},
                {"sample_index", s},
                {"grid",
                 {{"dim", sc.dim},
                  {"points_per_axis", sc.points_per_axis},
                  {"box_length", sc.box_length}}},
                {"encoding", "float64-le-row-major"},
                {"byte_count", bytes},
                {"checksum", hex},
            };
            std::snprintf(name, sizeof name, "density_%06zu.json", s);
            std::ofstream(out / name) << side.dump(2) << "\n";
        }
    }

    RunResult result;
    result.csv_path = csv_path.string();
    result.audit = conservation_audit(traj, sc.audit);

    const KineticBoundResult kb = kinetic_bound_check(traj);
    if (kb.applicable && !kb.passed) {
        result.audit.passed = false;
        result.audit.failures.push_back("kinetic-energy bound");
    }

    json identity_block;
    if (sc.dim == 3) {
        double worst = 0.0;
        for (const auto& st : traj.states) {
            const auto [lhs, rhs] = hartree_energy_identity(st, traj.coupling);
            const double rel =
                std::abs(lhs - rhs) / std::max(std::abs(rhs), 1e-300);
            worst = std::max(worst, rel);
        }
        const bool ok = worst <= 1e-8;
        identity_block = {{"max_rel_err", worst}, {"tolerance", 1e-8},
                          {"passed", ok}};
        if (!ok) {
            result.audit.passed = false;
            result.audit.failures.push_back("mean-field energy identity");
        }
    }

    json audit_json;
    audit_json["passed"] = result.audit.passed;
    audit_json["deterministic"] = sc.deterministic;
    json checks = json::array();
    for (const auto& c : result.audit.checks)
        checks.push_back({{"name", c.name},
                          {"value", c.value},
                          {"tolerance", c.tolerance},
                          {"passed", c.passed}});
    audit_json["checks"] = checks;
    audit_json["kinetic_bound"] = {{"applicable", kb.applicable},
                                   {"passed", kb.passed},
                                   {"min_lower_margin", kb.min_lower_margin},
                                   {"min_upper_margin", kb.min_upper_margin}};
    if (!identity_block.is_null())
        audit_json["hartree_energy_identity"] = identity_block;
    if (!traj.picard_stats.empty()) {
        json windows = json::array();
        for (const auto& wstat : traj.picard_stats)
            windows.push_back({{"t_start", wstat.t_start},
                               {"window", wstat.window},
                               {"iterations", wstat.distances.size()},
                               {"distances", wstat.distances}});
        audit_json["picard_windows"] = windows;
    }
    audit_json["failures"] = result.audit.failures;

    const fs::path audit_path = out / "audit.json";
    std::ofstream(audit_path) << audit_json.dump(2) << "\n";
    result.audit_path = audit_path.string();
    result.exit_code = result.audit.passed ? 0 : 2;
    return result;
}

}  // namespace tdhf
