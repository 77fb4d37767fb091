#pragma once

namespace tdhf {

/// Per-sample bookkeeping row. Arithmetic identities hold by construction:
/// e_pot = e_hartree - e_exchange and e_tot = e_kin + e_pot.
struct EnergyReport {
    double t = 0.0;
    double trace = 0.0;
    double trace_norm = 0.0;
    double e_kin = 0.0;
    double e_hartree = 0.0;
    double e_exchange = 0.0;
    double e_pot = 0.0;
    double e_tot = 0.0;
    double z_norm = 0.0;
    double y_norm = 0.0;
    double gram_defect = 0.0;
    double occupation_drift = 0.0;
    double min_eigenvalue = 0.0;
    double e_kin_abs = 0.0;  // |occupation|-weighted; not a CSV column
};

}  // namespace tdhf
