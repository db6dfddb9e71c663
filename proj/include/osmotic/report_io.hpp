#ifndef OSMOTIC_REPORT_IO_HPP
#define OSMOTIC_REPORT_IO_HPP

#include <cstdio>
#include <fstream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "osmotic/grid.hpp"
#include "osmotic/madelung.hpp"
#include "osmotic/nelson.hpp"
#include "osmotic/params.hpp"
#include "osmotic/reports.hpp"

namespace osmotic {

using json = nlohmann::json;

inline json to_json(const PhysicalParams& p) {
    return json{{"hbar", p.hbar}, {"mass", p.mass}, {"omega0", p.omega0},
                {"l", p.length_scale()}};
}

inline json to_json(const MomentReport& m) {
    return json{{"mean_x", m.mean_x},
                {"mean_p", m.mean_p},
                {"var_x", m.var_x},
                {"var_pc", m.var_pc},
                {"var_ps", m.var_ps},
                {"var_p", m.var_p},
                {"cov_x_pc", m.cov_x_pc},
                {"cov_x_ps", m.cov_x_ps},
                {"cov_x_p", m.cov_x_p},
                {"cov_pc_ps", m.cov_pc_ps},
                {"q_var_x", m.q_var_x},
                {"q_var_p", m.q_var_p},
                {"q_cov_xp", m.q_cov_xp},
                {"fisher_info", m.fisher_info},
                {"fisher_length_sq", m.fisher_length_sq},
                {"mean_ps_cubed", m.mean_ps_cubed}};
}

inline json to_json(const URReport& rep) {
    json arr = json::array();
    for (const auto& r : rep.relations)
        arr.push_back(json{{"name", r.name},
                           {"lhs", r.lhs},
                           {"rhs", r.rhs},
                           {"gap", r.gap},
                           {"saturated", r.saturated},
                           {"asserted", r.asserted}});
    return json{{"tolerance", rep.tolerance}, {"relations", arr}};
}

inline json to_json(const ResidualReport& r) {
    return json{{"continuity_rms", r.continuity_rms},
                {"hjm_rms", r.hjm_rms},
                {"hjm_rms_raw", r.hjm_rms_raw},
                {"extremal1_rms", r.extremal1_rms},
                {"extremal2_rms", r.extremal2_rms},
                {"extremal2_rms_raw", r.extremal2_rms_raw},
                {"excluded_mass", r.excluded_mass}};
}

inline json to_json(const PathEnsembleStats& s) {
    return json{{"t", s.t},
                {"emp_mean", s.emp_mean},
                {"emp_var", s.emp_var},
                {"stderr_mean", s.stderr_mean},
                {"stderr_var", s.stderr_var}};
}

/// "%.17g" — enough digits to round-trip a double through text.
inline std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string fmt_human(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

class CsvWriter {
  public:
    explicit CsvWriter(std::ostream& os) : os_(os) {}

    void header(const std::vector<std::string>& cols) { line(cols); }

    void row(const std::vector<double>& vals) {
        std::vector<std::string> cols;
        cols.reserve(vals.size());
        for (double v : vals) cols.push_back(fmt_full(v));
        line(cols);
    }

    void line(const std::vector<std::string>& cols) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (i) os_ << ',';
            os_ << cols[i];
        }
        os_ << "\r\n";
    }

  private:
    std::ostream& os_;
};

inline void dump_fields_csv(std::ostream& os, const MadelungFields& mf) {
    CsvWriter w(os);
    w.header({"x", "rho", "S", "p_c", "p_s", "V_q"});
    for (std::size_t i = 0; i < mf.grid.n; ++i)
        w.row({mf.grid.x(i), mf.rho.values[i], mf.s.values[i], mf.p_c.values[i],
               mf.p_s.values[i], mf.v_q.values[i]});
}

inline void dump_snapshot_csv(std::ostream& os, const ComplexField& psi) {
    CsvWriter w(os);
    w.header({"x", "re_psi", "im_psi"});
    for (std::size_t i = 0; i < psi.grid.n; ++i)
        w.row({psi.grid.x(i), psi.values[i].real(), psi.values[i].imag()});
}

inline void dump_sde_stats_csv(std::ostream& os, const std::vector<PathEnsembleStats>& rows,
                               std::size_t n_paths, std::uint64_t seed) {
    CsvWriter w(os);
    w.header({"t", "emp_mean", "emp_var", "stderr_mean", "stderr_var", "n_paths", "seed"});
    for (const auto& s : rows)
        w.line({fmt_full(s.t), fmt_full(s.emp_mean), fmt_full(s.emp_var),
                fmt_full(s.stderr_mean), fmt_full(s.stderr_var), std::to_string(n_paths),
                std::to_string(seed)});
}

inline std::vector<std::string> moment_csv_header() {
    return {"mean_x",   "mean_p",  "var_x",   "var_pc",      "var_ps",
            "var_p",    "cov_x_pc", "cov_x_ps", "cov_x_p",    "cov_pc_ps",
            "q_var_x",  "q_var_p", "q_cov_xp", "fisher_info", "fisher_length_sq",
            "mean_ps_cubed"};
}

inline std::vector<double> moment_csv_row(const MomentReport& m) {
    return {m.mean_x,   m.mean_p,  m.var_x,    m.var_pc,      m.var_ps,
            m.var_p,    m.cov_x_pc, m.cov_x_ps, m.cov_x_p,     m.cov_pc_ps,
            m.q_var_x,  m.q_var_p, m.q_cov_xp, m.fisher_info, m.fisher_length_sq,
            m.mean_ps_cubed};
}

inline void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open output file: " + path);
    os << text;
    if (!os) throw std::runtime_error("failed writing output file: " + path);
}

}  // namespace osmotic

#endif
