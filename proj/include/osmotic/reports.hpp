#ifndef OSMOTIC_REPORTS_HPP
#define OSMOTIC_REPORTS_HPP

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace osmotic {

/// First and second moments of (x, p_c, p_s, p) over rho, the quantum
/// moments of (x, p) over psi, and the Fisher information of rho.
struct MomentReport {
    double mean_x = 0.0;
    double mean_p = 0.0;
    double var_x = 0.0;
    double var_pc = 0.0;
    double var_ps = 0.0;
    double var_p = 0.0;
    double cov_x_pc = 0.0;
    double cov_x_ps = 0.0;
    double cov_x_p = 0.0;
    double cov_pc_ps = 0.0;
    double q_var_x = 0.0;
    double q_var_p = 0.0;
    double q_cov_xp = 0.0;
    double fisher_info = 0.0;
    double fisher_length_sq = 0.0;
    double mean_ps_cubed = 0.0;
};

/// One evaluated uncertainty relation: lhs >= rhs (or equality for the
/// exact relations).  `asserted` marks relations the theory guarantees;
/// the stochastic sum relation can legitimately dip below its bound.
struct URRecord {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double gap = 0.0;
    bool saturated = false;
    bool asserted = true;
};

struct URReport {
    std::vector<URRecord> relations;
    double tolerance = 0.0;

    const URRecord& get(const std::string& name) const;
    bool all_asserted_hold() const;
};

inline const URRecord& URReport::get(const std::string& name) const {
    for (const auto& r : relations)
        if (r.name == name) return r;
    throw std::invalid_argument("URReport: unknown relation " + name);
}

inline bool URReport::all_asserted_hold() const {
    for (const auto& r : relations) {
        const double scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1.0});
        if (r.asserted && r.gap < -tolerance * scale) return false;
    }
    return true;
}

/// RMS residuals of the Bohm pair and of the extremal pair in the
/// (rho, S_minus) variables, over the unmasked region.  The hjm and
/// extremal2 equations carry an additive-constant ambiguity from the
/// global phase, so their primary values are spatial-mean-removed and
/// the raw values are reported alongside.
struct ResidualReport {
    double continuity_rms = 0.0;
    double hjm_rms = 0.0;
    double hjm_rms_raw = 0.0;
    double extremal1_rms = 0.0;
    double extremal2_rms = 0.0;
    double extremal2_rms_raw = 0.0;
    double excluded_mass = 0.0;
};

}  // namespace osmotic

#endif
