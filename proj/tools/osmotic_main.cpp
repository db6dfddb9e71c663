// Command-line front end: state construction, moment/UR reports, dynamics
// verification, Nelson SDE runs, parameter sweeps and field dumps.
//
// Exit codes: 0 success, 1 verified-property violation, 2 usage/config error.

#include <cmath>
#include <complex>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "osmotic/osmotic.hpp"

namespace {

using namespace osmotic;

constexpr int kExitOk = 0;
constexpr int kExitViolation = 1;
constexpr int kExitConfig = 2;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Accepts "1", "-2.5", "i", "-i", "2i", "1+2i", "0.5-0.25i".
complexd parse_complex(const std::string& text) {
    std::string s;
    for (char c : text)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw ConfigError("empty complex literal");

    auto parse_part = [](std::string part, bool imag_unit_ok) -> double {
        if (imag_unit_ok && (part.empty() || part == "+")) return 1.0;
        if (imag_unit_ok && part == "-") return -1.0;
        std::size_t used = 0;
        const double v = std::stod(part, &used);
        if (used != part.size()) throw ConfigError("bad numeric literal: " + part);
        return v;
    };

    // split at the last '+'/'-' that is not an exponent sign and not leading
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    try {
        if (!s.empty() && s.back() == 'i') {
            s.pop_back();
            if (split == std::string::npos)
                return {0.0, parse_part(s, true)};
            return {parse_part(s.substr(0, split), false),
                    parse_part(s.substr(split), true)};
        }
        if (split != std::string::npos) throw ConfigError("bad complex literal: " + text);
        return {parse_part(s, false), 0.0};
    } catch (const std::exception&) {
        throw ConfigError("bad complex literal: " + text);
    }
}

// "const:W" | "quench:W0,W1@T1[,W2@T2...]" | "table:path.csv"
FrequencyProfile parse_omega(const std::string& text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("bad omega profile: " + text);
    const std::string kind = text.substr(0, colon);
    const std::string body = text.substr(colon + 1);
    try {
        if (kind == "const") return FrequencyProfile::constant(std::stod(body));
        if (kind == "quench") {
            std::vector<std::string> parts;
            std::stringstream ss(body);
            std::string item;
            while (std::getline(ss, item, ',')) parts.push_back(item);
            if (parts.size() < 2) throw ConfigError("quench needs w0 and at least one w@t");
            const double w0 = std::stod(parts[0]);
            std::vector<std::pair<double, double>> switches;
            for (std::size_t i = 1; i < parts.size(); ++i) {
                const auto at = parts[i].find('@');
                if (at == std::string::npos) throw ConfigError("quench entry needs w@t");
                switches.emplace_back(std::stod(parts[i].substr(at + 1)),
                                      std::stod(parts[i].substr(0, at)));
            }
            return FrequencyProfile::quench(w0, std::move(switches));
        }
        if (kind == "table") {
            std::ifstream is(body);
            if (!is) throw ConfigError("cannot open omega table: " + body);
            std::vector<double> ts, ws;
            std::string line;
            while (std::getline(is, line)) {
                if (line.empty() || line[0] == '#') continue;
                std::replace(line.begin(), line.end(), ',', ' ');
                std::istringstream ls(line);
                double t, w;
                if (ls >> t >> w) {
                    ts.push_back(t);
                    ws.push_back(w);
                }
            }
            return FrequencyProfile::table(std::move(ts), std::move(ws));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("bad omega profile: ") + e.what());
    }
    throw ConfigError("unknown omega profile kind: " + kind);
}

struct StateOptions {
    double hbar = 1.0, mass = 1.0, omega0 = 1.0;
    double x_min = -12.0, x_max = 12.0;
    std::size_t n = 2048;
    std::string state = "cs";
    std::string alpha = "0";
    std::optional<double> r;
    std::string mu, nu;
    double t = 0.0;
    std::string omega = "const:1";
    double ode_dt = 1e-3;
    double rho_floor = 1e-12;
};

void add_state_options(CLI::App* cmd, StateOptions& o) {
    cmd->add_option("--hbar", o.hbar, "Planck constant");
    cmd->add_option("--mass", o.mass, "particle mass");
    cmd->add_option("--omega0", o.omega0, "reference oscillator frequency");
    cmd->add_option("--xmin", o.x_min, "grid left endpoint");
    cmd->add_option("--xmax", o.x_max, "grid right endpoint");
    cmd->add_option("--n", o.n, "grid points");
    cmd->add_option("--state", o.state, "state kind: cs | ss")
        ->check(CLI::IsMember({"cs", "ss"}));
    cmd->add_option("--alpha", o.alpha, "complex eigenvalue, e.g. 1+2i");
    cmd->add_option("--r", o.r, "squeeze factor (ss)");
    cmd->add_option("--mu", o.mu, "complex mu (ss, with --nu)");
    cmd->add_option("--nu", o.nu, "complex nu (ss, with --mu)");
    cmd->add_option("--t", o.t, "evolution time");
    cmd->add_option("--omega", o.omega, "frequency profile const:W | quench:W0,W@T | table:FILE");
    cmd->add_option("--ode-dt", o.ode_dt, "epsilon-ODE step");
    cmd->add_option("--rho-floor", o.rho_floor, "relative density floor for masking");
}

struct BuiltState {
    PhysicalParams params;
    Grid grid;
    FrequencyProfile profile = FrequencyProfile::constant(1.0);
    SqueezedStateParams sp;      // at time t
    SqueezedStateParams sp0;     // at time 0
};

BuiltState build_state(const StateOptions& o) {
    BuiltState b;
    try {
        b.params = PhysicalParams(o.hbar, o.mass, o.omega0);
        b.grid = make_grid(o.x_min, o.x_max, o.n);
        b.profile = parse_omega(o.omega);
        const complexd alpha = parse_complex(o.alpha);
        if (o.state == "cs") {
            b.sp0 = coherent_params(alpha, b.params);
        } else if (!o.mu.empty() || !o.nu.empty()) {
            if (o.mu.empty() || o.nu.empty())
                throw ConfigError("--mu and --nu must be given together");
            b.sp0 = make_params(parse_complex(o.mu), parse_complex(o.nu), alpha, b.params);
        } else if (o.r.has_value()) {
            b.sp0 = squeeze_params(*o.r, alpha, b.params);
        } else {
            throw ConfigError("ss state needs --r or --mu/--nu");
        }
        b.sp = (o.t != 0.0) ? evolve_params(b.sp0, b.profile, o.t, o.ode_dt) : b.sp0;
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return b;
}

json meta_json(const std::string& command, const StateOptions& o, const BuiltState& b) {
    json m;
    m["command"] = command;
    m["params"] = to_json(b.params);
    m["grid"] = json{{"x_min", o.x_min}, {"x_max", o.x_max}, {"n", o.n}, {"dx", b.grid.dx}};
    m["state"] = json{{"kind", o.state},
                      {"alpha", o.alpha},
                      {"mu_t", json{{"re", b.sp.mu.real()}, {"im", b.sp.mu.imag()}}},
                      {"nu_t", json{{"re", b.sp.nu.real()}, {"im", b.sp.nu.imag()}}}};
    if (o.r.has_value()) m["state"]["r"] = *o.r;
    m["omega"] = o.omega;
    m["t"] = o.t;
    m["ode_dt"] = o.ode_dt;
    m["rho_floor"] = o.rho_floor;
    return m;
}

std::string out_path(const std::string& explicit_path, const std::string& fallback) {
    if (!explicit_path.empty()) return explicit_path;
    std::string dir = ".";
    if (const char* env = std::getenv("OSMOTIC_OUT_DIR"); env && *env) dir = env;
    return dir + "/" + fallback;
}

json moment_delta(const MomentReport& a, const MomentReport& g) {
    const json ja = to_json(a), jg = to_json(g);
    json d;
    for (auto it = ja.begin(); it != ja.end(); ++it)
        d[it.key()] = jg.at(it.key()).get<double>() - it.value().get<double>();
    return d;
}

void print_moment_table(std::ostream& os, const MomentReport& a, const MomentReport& g) {
    const json ja = to_json(a), jg = to_json(g);
    os << "  field                 analytic        grid            delta\n";
    for (auto it = ja.begin(); it != ja.end(); ++it) {
        const double va = it.value().get<double>();
        const double vg = jg.at(it.key()).get<double>();
        char line[160];
        std::snprintf(line, sizeof(line), "  %-18s %15s %15s %12.3e\n", it.key().c_str(),
                      fmt_human(va).c_str(), fmt_human(vg).c_str(), vg - va);
        os << line;
    }
}

// ---------------------------------------------------------------- report --

struct ReportOptions {
    StateOptions state;
    std::string out;
    std::string format = "json";
    double tol_analytic = 1e-6;
    double tol_grid = 1e-4;
};

int cmd_report(const ReportOptions& o) {
    const BuiltState b = build_state(o.state);
    const MomentReport analytic = analytic_moments(b.sp);
    const ComplexField psi = eval_psi(b.sp, b.grid);
    const MadelungFields mf = decompose(psi, b.params, o.state.rho_floor);
    const MomentReport grid = grid_moments(mf, psi, b.params);

    const URReport ur_analytic = ur_report(analytic, b.params, o.tol_analytic);
    const URReport ur_grid = ur_report(grid, b.params, o.tol_grid);

    json out;
    out["meta"] = meta_json("report", o.state, b);
    out["meta"]["tol_analytic"] = o.tol_analytic;
    out["meta"]["tol_grid"] = o.tol_grid;
    out["moments"] = json{{"analytic", to_json(analytic)},
                          {"grid", to_json(grid)},
                          {"delta", moment_delta(analytic, grid)}};
    out["ur"] = json{{"analytic", to_json(ur_analytic)}, {"grid", to_json(ur_grid)}};
    out["r_p"] = json{{"closed_form", r_p_closed_form(b.sp)},
                      {"analytic_moments", r_p_from_moments(analytic)},
                      {"grid_moments", r_p_from_moments(grid)}};

    if (o.format == "json") {
        write_text_file(out_path(o.out, "report.json"), out.dump(2) + "\n");
    } else {
        std::ostringstream csv;
        CsvWriter w(csv);
        auto hdr = moment_csv_header();
        hdr.insert(hdr.begin(), "source");
        w.line(hdr);
        auto emit = [&w](const char* src, const MomentReport& m) {
            std::vector<std::string> cols{src};
            for (double v : moment_csv_row(m)) cols.push_back(fmt_full(v));
            w.line(cols);
        };
        emit("analytic", analytic);
        emit("grid", grid);
        write_text_file(out_path(o.out, "report.csv"), csv.str());
    }

    std::cout << "state " << o.state.state << " alpha=" << o.state.alpha
              << " t=" << fmt_human(o.state.t) << "\n";
    print_moment_table(std::cout, analytic, grid);
    std::cout << "  r_p closed-form " << fmt_human(r_p_closed_form(b.sp)) << ", grid "
              << fmt_human(r_p_from_moments(grid)) << "\n";
    for (const auto& rel : ur_grid.relations) {
        std::cout << "  UR " << rel.name << ": gap " << fmt_human(rel.gap)
                  << (rel.saturated ? "  [saturated]" : "") << "\n";
    }

    const bool ok = ur_analytic.all_asserted_hold() && ur_grid.all_asserted_hold();
    if (!ok) std::cerr << "uncertainty-relation violation detected\n";
    return ok ? kExitOk : kExitViolation;
}

// ---------------------------------------------------------------- verify --

struct VerifyOptions {
    StateOptions state;
    std::string out;
    double delta = 1e-4;
    double inject_error = 0.0;
    bool pde = true;
    double pde_dt = 1e-3;
    double tol_bohm = 1e-5;
    double tol_extremal = 1e-4;
    double tol_l2 = 1e-4;
    double tol_norm_drift = 1e-10;
    std::string dump_snapshots;
};

SnapshotTriple analytic_triple(const BuiltState& b, const StateOptions& so, double t0,
                               double delta) {
    auto at = [&](double tt) {
        const SqueezedStateParams sp =
            (tt != 0.0) ? evolve_params(b.sp0, b.profile, tt, so.ode_dt) : b.sp0;
        return eval_psi(sp, b.grid);
    };
    SnapshotTriple tr;
    tr.psi_minus = at(t0 - delta);
    tr.psi_center = at(t0);
    tr.psi_plus = at(t0 + delta);
    tr.t0 = t0;
    tr.delta = delta;
    return tr;
}

ComplexField perturb_density(const ComplexField& psi, double eps, double l) {
    ComplexField out = psi;
    for (std::size_t i = 0; i < psi.size(); ++i) {
        const double f = 1.0 + eps * std::sin(4.0 * psi.grid.x(i) / l);
        out.values[i] *= std::sqrt(std::max(0.0, f));
    }
    return normalize(out);
}

int cmd_verify(const VerifyOptions& o) {
    const BuiltState b = build_state(o.state);
    const double t_final = (o.state.t > 0.0) ? o.state.t : 2.0 * M_PI;

    json out;
    StateOptions so = o.state;
    so.t = t_final;
    out["meta"] = meta_json("verify", so, b);
    out["meta"]["delta"] = o.delta;
    out["meta"]["inject_error"] = o.inject_error;
    out["meta"]["pde_dt"] = o.pde_dt;

    bool ok = true;
    const double l = b.params.length_scale();

    // Residuals of the analytic trajectory at three probe times.
    json probes = json::array();
    for (double frac : {0.25, 0.5, 0.75}) {
        const double t0 = frac * t_final;
        SnapshotTriple tr = analytic_triple(b, o.state, t0, o.delta);
        if (o.inject_error > 0.0) {
            tr.psi_minus = perturb_density(tr.psi_minus, o.inject_error, l);
            tr.psi_center = perturb_density(tr.psi_center, o.inject_error, l);
            tr.psi_plus = perturb_density(tr.psi_plus, o.inject_error, l);
        }
        ResidualReport bohm = bohm_residuals(tr, b.profile, b.params, o.state.rho_floor);
        const ResidualReport ext = extremal_residuals(tr, b.profile, b.params, o.state.rho_floor);
        bohm.extremal1_rms = ext.extremal1_rms;
        bohm.extremal2_rms = ext.extremal2_rms;
        bohm.extremal2_rms_raw = ext.extremal2_rms_raw;
        json jp = to_json(bohm);
        jp["t"] = t0;
        probes.push_back(jp);
        const bool under = bohm.continuity_rms < o.tol_bohm && bohm.hjm_rms < o.tol_bohm &&
                           bohm.extremal1_rms < o.tol_extremal &&
                           bohm.extremal2_rms < o.tol_extremal;
        ok = ok && under;
        std::cout << "residuals t=" << fmt_human(t0) << ": continuity "
                  << fmt_human(bohm.continuity_rms) << ", hjm " << fmt_human(bohm.hjm_rms)
                  << ", extremal " << fmt_human(bohm.extremal1_rms) << "/"
                  << fmt_human(bohm.extremal2_rms) << (under ? "  [ok]" : "  [FAIL]") << "\n";
    }
    out["residuals"] = probes;

    if (o.pde) {
        const ComplexField psi0 = eval_psi(b.sp0, b.grid);
        PdeConfig cfg;
        cfg.dt = o.pde_dt;
        cfg.t_final = t_final;
        cfg.profile = b.profile;
        cfg.snapshot_times = {t_final};
        const double norm0 = norm_squared(psi0);
        const auto snaps = evolve_pde(psi0, cfg, b.params);
        const ComplexField& psi_T = snaps.back().psi;
        const double drift = std::abs(norm_squared(psi_T) - norm0);

        const SqueezedStateParams spT = evolve_params(b.sp0, b.profile, t_final, o.state.ode_dt);
        const ComplexField ref = eval_psi(spT, b.grid);
        const StateDistance d = compare_states(ref, psi_T);

        out["pde"] = json{{"t_final", t_final},
                          {"l2_error_mod_phase", d.l2_error_mod_phase},
                          {"fidelity", d.fidelity},
                          {"norm_drift", drift}};
        const bool under = d.l2_error_mod_phase < o.tol_l2 && drift < o.tol_norm_drift;
        ok = ok && under;
        std::cout << "pde vs analytic at t=" << fmt_human(t_final) << ": L2 "
                  << fmt_human(d.l2_error_mod_phase) << ", norm drift " << fmt_human(drift)
                  << (under ? "  [ok]" : "  [FAIL]") << "\n";

        if (!o.dump_snapshots.empty()) {
            std::ostringstream csv;
            dump_snapshot_csv(csv, psi_T);
            write_text_file(o.dump_snapshots + "/snapshot.csv", csv.str());
            json meta{{"t", t_final}, {"dt", o.pde_dt}, {"n", b.grid.n},
                      {"params", to_json(b.params)}};
            write_text_file(o.dump_snapshots + "/snapshot.meta.json", meta.dump(2) + "\n");
        }
    }

    write_text_file(out_path(o.out, "verify.json"), out.dump(2) + "\n");
    return ok ? kExitOk : kExitViolation;
}

// ------------------------------------------------------------------- sde --

struct SdeOptions {
    StateOptions state;
    std::string out;
    std::size_t n_paths = 100000;
    double dt = 1e-3;
    double t_final = 10.0;
    std::uint64_t seed = 20260810;
    std::size_t checkpoints = 10;
    std::string initial = "exact";
    bool ks = false;
};

int cmd_sde(const SdeOptions& o) {
    const BuiltState b = build_state(o.state);
    if (o.checkpoints == 0) throw ConfigError("sde: need at least one checkpoint");

    SdeConfig cfg;
    cfg.n_paths = o.n_paths;
    cfg.dt = o.dt;
    cfg.t_final = o.t_final;
    cfg.seed = o.seed;
    cfg.initial_sampling =
        (o.initial == "cdf") ? InitialSampling::inverse_cdf : InitialSampling::gaussian_exact;

    const LinearDriftTable drift = make_drift_table(b.sp0, b.profile, o.t_final, o.state.ode_dt);
    const double diffusion = b.params.hbar / (2.0 * b.params.mass);

    std::vector<double> cps;
    for (std::size_t i = 1; i <= o.checkpoints; ++i)
        cps.push_back(o.t_final * static_cast<double>(i) / static_cast<double>(o.checkpoints));

    PathEnsemble ens;
    const MomentReport m0 = analytic_moments(b.sp0);
    if (cfg.initial_sampling == InitialSampling::gaussian_exact) {
        const GaussianSampler init{m0.mean_x, std::sqrt(m0.var_x)};
        ens = sample_paths(cfg, drift, init, diffusion, cps);
    } else {
        const ComplexField psi0 = eval_psi(b.sp0, b.grid);
        const InverseCdfSampler init(abs_squared(psi0));
        ens = sample_paths(cfg, drift, init, diffusion, cps);
    }

    bool ok = true;
    std::vector<PathEnsembleStats> rows;
    json jcp = json::array();
    for (std::size_t i = 0; i < ens.times.size(); ++i) {
        const PathEnsembleStats st = empirical_moments(ens, ens.times[i]);
        rows.push_back(st);
        const SqueezedStateParams spt =
            (ens.times[i] > 0.0)
                ? evolve_params(b.sp0, b.profile, ens.times[i], o.state.ode_dt)
                : b.sp0;
        const MomentReport mt = analytic_moments(spt);
        const bool mean_ok = std::abs(st.emp_mean - mt.mean_x) <= 3.0 * st.stderr_mean;
        const bool var_ok = std::abs(st.emp_var - mt.var_x) <= 3.0 * st.stderr_var;
        ok = ok && mean_ok && var_ok;
        json jc = to_json(st);
        jc["ref_mean"] = mt.mean_x;
        jc["ref_var"] = mt.var_x;
        jc["mean_ok"] = mean_ok;
        jc["var_ok"] = var_ok;
        if (o.ks && i + 1 == ens.times.size()) {
            const double d = ks_distance(ens.samples[i], [&](double x) {
                return gaussian_cdf(x, mt.mean_x, std::sqrt(mt.var_x));
            });
            const double crit = 1.628 / std::sqrt(static_cast<double>(ens.n_paths));
            jc["ks_distance"] = d;
            jc["ks_critical_1pct"] = crit;
            ok = ok && d < crit;
        }
        jcp.push_back(jc);
        std::cout << "t=" << fmt_human(st.t) << " mean " << fmt_human(st.emp_mean) << " (ref "
                  << fmt_human(mt.mean_x) << "), var " << fmt_human(st.emp_var) << " (ref "
                  << fmt_human(mt.var_x) << ")" << ((mean_ok && var_ok) ? "  [ok]" : "  [FAIL]")
                  << "\n";
    }

    std::ostringstream csv;
    dump_sde_stats_csv(csv, rows, ens.n_paths, ens.seed);
    write_text_file(out_path(o.out, "sde.csv"), csv.str());

    json out;
    StateOptions so = o.state;
    const BuiltState bmeta = b;
    out["meta"] = meta_json("sde", so, bmeta);
    out["meta"]["n_paths"] = o.n_paths;
    out["meta"]["sde_dt"] = o.dt;
    out["meta"]["t_final"] = o.t_final;
    out["meta"]["seed"] = o.seed;
    out["meta"]["initial_sampling"] = o.initial;
    out["checkpoints"] = jcp;
    write_text_file(out_path(o.out.empty() ? "" : o.out + ".json", "sde.json"),
                    out.dump(2) + "\n");
    return ok ? kExitOk : kExitViolation;
}

// ----------------------------------------------------------------- sweep --

struct SweepOptions {
    StateOptions state;
    std::string out;
    std::string param = "t";
    std::string range;  // a:b:N
};

int cmd_sweep(const SweepOptions& o) {
    double a = 0.0, bnd = 0.0;
    std::size_t count = 0;
    {
        std::stringstream ss(o.range);
        std::string pa, pb, pn;
        if (!std::getline(ss, pa, ':') || !std::getline(ss, pb, ':') || !std::getline(ss, pn))
            throw ConfigError("sweep range must be a:b:N");
        try {
            a = std::stod(pa);
            bnd = std::stod(pb);
            count = static_cast<std::size_t>(std::stoul(pn));
        } catch (const std::exception&) {
            throw ConfigError("sweep range must be a:b:N");
        }
    }
    if (count == 0 || bnd < a) throw ConfigError("sweep: empty range");
    if (o.param != "t" && o.param != "r") throw ConfigError("sweep parameter must be t or r");

    const BuiltState b = build_state(o.state);

    std::ostringstream csv;
    CsvWriter w(csv);
    auto hdr = moment_csv_header();
    hdr.insert(hdr.begin(), o.param);
    hdr.push_back("r_p_closed_form");
    hdr.push_back("r_p_moments");
    hdr.push_back("sum_quantum");
    hdr.push_back("sum_stochastic");
    w.line(hdr);

    double max_abs_rp = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double v = (count == 1) ? a : a + (bnd - a) * static_cast<double>(i) /
                                                static_cast<double>(count - 1);
        SqueezedStateParams sp = b.sp0;
        if (o.param == "r") {
            sp = squeeze_params(v, parse_complex(o.state.alpha), b.params);
            if (o.state.t != 0.0) sp = evolve_params(sp, b.profile, o.state.t, o.state.ode_dt);
        } else {
            sp = (v != 0.0) ? evolve_params(b.sp0, b.profile, v, o.state.ode_dt) : b.sp0;
        }
        const MomentReport m = analytic_moments(sp);
        const double rp_cf = r_p_closed_form(sp);
        const double rp_m = r_p_from_moments(m);
        max_abs_rp = std::max(max_abs_rp, std::abs(rp_cf));
        const double l2 = b.params.hbar / (b.params.mass * b.params.omega0);
        const double sq = m.q_var_x / l2 + m.q_var_p * l2 / (b.params.hbar * b.params.hbar);
        const double ssum = m.var_x / l2 + m.var_p * l2 / (b.params.hbar * b.params.hbar);

        std::vector<std::string> cols{fmt_full(v)};
        for (double mv : moment_csv_row(m)) cols.push_back(fmt_full(mv));
        cols.push_back(fmt_full(rp_cf));
        cols.push_back(fmt_full(rp_m));
        cols.push_back(fmt_full(sq));
        cols.push_back(fmt_full(ssum));
        w.line(cols);
    }

    write_text_file(out_path(o.out, "sweep.csv"), csv.str());
    std::cout << "sweep " << o.param << " over [" << fmt_human(a) << ", " << fmt_human(bnd)
              << "] with " << count << " points; max |r_p| = " << fmt_human(max_abs_rp) << "\n";
    return (max_abs_rp <= 1.0 + 1e-12) ? kExitOk : kExitViolation;
}

// ----------------------------------------------------------- dump-fields --

struct DumpOptions {
    StateOptions state;
    std::string out;
};

int cmd_dump_fields(const DumpOptions& o) {
    const BuiltState b = build_state(o.state);
    const ComplexField psi = eval_psi(b.sp, b.grid);
    const MadelungFields mf = decompose(psi, b.params, o.state.rho_floor);

    std::ostringstream csv;
    dump_fields_csv(csv, mf);
    const std::string path = out_path(o.out, "fields.csv");
    write_text_file(path, csv.str());
    json meta = meta_json("dump-fields", o.state, b);
    meta["excluded_mass"] = mf.excluded_mass;
    write_text_file(path + ".meta.json", meta.dump(2) + "\n");
    std::cout << "wrote " << path << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1D stochastic-mechanics toolkit: coherent/squeezed states, the "
                 "current/osmotic momentum split, uncertainty-relation reports, "
                 "Crank-Nicolson cross-checks and Nelson diffusion sampling"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; section per subcommand");
    app.allow_config_extras(false);

    ReportOptions ro;
    auto* report = app.add_subcommand("report", "moment tables and the UR ledger");
    add_state_options(report, ro.state);
    report->add_option("--out", ro.out, "output file path");
    report->add_option("--format", ro.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    report->add_option("--tol-analytic", ro.tol_analytic, "saturation tolerance, closed forms");
    report->add_option("--tol-grid", ro.tol_grid, "saturation tolerance, grid route");

    VerifyOptions vo;
    auto* verify = app.add_subcommand("verify", "Bohm/extremal residuals and PDE cross-check");
    add_state_options(verify, vo.state);
    verify->add_option("--out", vo.out, "output file path");
    verify->add_option("--delta", vo.delta, "centered time difference");
    verify->add_option("--inject-error", vo.inject_error, "negative control: relative rho bump");
    verify->add_flag("!--no-pde", vo.pde, "skip the Crank-Nicolson cross-check");
    verify->add_option("--pde-dt", vo.pde_dt, "Crank-Nicolson step");
    verify->add_option("--tol-bohm", vo.tol_bohm, "continuity/HJM RMS threshold");
    verify->add_option("--tol-extremal", vo.tol_extremal, "extremal RMS threshold");
    verify->add_option("--tol-l2", vo.tol_l2, "PDE-vs-analytic L2 threshold");
    verify->add_option("--tol-norm-drift", vo.tol_norm_drift, "PDE norm drift threshold");
    verify->add_option("--dump-snapshots", vo.dump_snapshots, "directory for snapshot dumps");

    SdeOptions so;
    auto* sde = app.add_subcommand("sde", "Nelson forward-diffusion Monte Carlo validation");
    add_state_options(sde, so.state);
    sde->add_option("--out", so.out, "output CSV path");
    sde->add_option("--paths", so.n_paths, "number of paths");
    sde->add_option("--sde-dt", so.dt, "Euler-Maruyama step");
    sde->add_option("--t-final", so.t_final, "simulation horizon");
    sde->add_option("--seed", so.seed, "RNG seed");
    sde->add_option("--checkpoints", so.checkpoints, "number of evenly spaced checkpoints");
    sde->add_option("--initial", so.initial, "initial law: exact | cdf")
        ->check(CLI::IsMember({"exact", "cdf"}));
    sde->add_flag("--ks", so.ks, "Kolmogorov-Smirnov test at the final checkpoint");

    SweepOptions wo;
    auto* sweep = app.add_subcommand("sweep", "moment/r_p rows over a parameter range");
    add_state_options(sweep, wo.state);
    sweep->add_option("--out", wo.out, "output CSV path");
    sweep->add_option("--sweep-param", wo.param, "t | r");
    sweep->add_option("--range", wo.range, "a:b:N inclusive range")->required();

    DumpOptions dopt;
    auto* dump = app.add_subcommand("dump-fields", "CSV of (x, rho, S, p_c, p_s, V_q)");
    add_state_options(dump, dopt.state);
    dump->add_option("--out", dopt.out, "output CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    try {
        if (report->parsed()) return cmd_report(ro);
        if (verify->parsed()) return cmd_verify(vo);
        if (sde->parsed()) return cmd_sde(so);
        if (sweep->parsed()) return cmd_sweep(wo);
        if (dump->parsed()) return cmd_dump_fields(dopt);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitViolation;
    }
    return kExitConfig;
}
