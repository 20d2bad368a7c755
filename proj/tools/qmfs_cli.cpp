// Command-line front end: figure regeneration, sweeps and Monte Carlo runs.
// Every subcommand writes <out>/<name>.csv plus <out>/<name>.manifest.json.
//
// Exit codes: 0 success, 1 other failure, 2 invalid config, 3 unreachable target.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "qmfs/qmfs.hpp"

namespace fs = std::filesystem;
using namespace qmfs;

namespace {

struct Grid {
    double start = 0.0;
    double stop = 0.0;
    int count = 0;
    bool log = false;

    std::vector<double> points() const {
        std::vector<double> v;
        for (int i = 0; i < count; ++i) {
            const double t = count == 1 ? 0.0 : static_cast<double>(i) / (count - 1);
            v.push_back(log ? start * std::pow(stop / start, t) : start + (stop - start) * t);
        }
        return v;
    }

    std::string spec() const {
        return format_double(start) + ":" + format_double(stop) + ":" + std::to_string(count) + (log ? ":log" : "");
    }
};

// "start:stop:count[:log]"
Grid parse_grid(const std::string& text) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    if (parts.size() != 3 && parts.size() != 4) throw CLI::ValidationError("--grid", "expected start:stop:count[:log]");
    Grid g;
    try {
        g.start = std::stod(parts[0]);
        g.stop = std::stod(parts[1]);
        g.count = std::stoi(parts[2]);
    } catch (const std::exception&) {
        throw CLI::ValidationError("--grid", "non-numeric entry in '" + text + "'");
    }
    if (parts.size() == 4) {
        if (parts[3] != "log") throw CLI::ValidationError("--grid", "fourth field must be 'log'");
        g.log = true;
    }
    if (g.count < 1) throw CLI::ValidationError("--grid", "count must be >= 1");
    if (g.log && !(g.start > 0.0 && g.stop > 0.0)) throw CLI::ValidationError("--grid", "log grid needs positive ends");
    return g;
}

struct Options {
    std::string config_path;
    std::string out_dir = ".";
    std::uint64_t seed = 1;
    int threads = 1;
    std::string grid;
    double target_fidelity = 0.9999;
    double N = 8.0;
    double phi = std::numbers::pi / 2;
    double kappa_tau = 50.0;
    int n_traj = 10000;
    double dt = 0.0;
    std::string scheme = "euler";
    std::vector<double> delta_kappas{0.0, 0.01, 0.02, 0.05};
};

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<CsvWriter::Cell>> rows;
};

struct Result {
    Table table;
    Json extra = Json::object();
    std::optional<ReadoutConfig> config;
    std::optional<Grid> grid;
    /// Additional CSV files (name -> table).
    std::vector<std::pair<std::string, Table>> side_tables;
};

std::optional<ReadoutConfig> load_if_given(const Options& o) {
    if (o.config_path.empty()) return std::nullopt;
    auto c = load_config(o.config_path);
    validate(c);
    return c;
}

ReadoutConfig require_config(const Options& o) {
    if (o.config_path.empty()) throw ConfigError(ConfigErrorKind::Parse, "<file>", "--config is required");
    return *load_if_given(o);
}

Grid grid_or(const Options& o, Grid fallback) { return o.grid.empty() ? fallback : parse_grid(o.grid); }

template <class Fn>
std::vector<std::vector<CsvWriter::Cell>> sweep(const std::vector<double>& xs, int threads, Fn&& fn) {
    std::vector<std::vector<CsvWriter::Cell>> rows(xs.size());
    parallel_for(static_cast<int>(xs.size()), threads, [&](int i) { rows[i] = fn(xs[i]); });
    return rows;
}

// Reference parameters extracted from any config: cavity-1 style chi and
// kappa, drive n0, squeeze r and loss.
struct Reference {
    double chi = 0.5;
    double kappa = 1.0;
    double n0 = 1.0;
    double r = 0.0;
    ReadoutConfig base;
};

Reference reference_of(const ReadoutConfig& c) {
    const auto v = validate(c);
    Reference ref;
    ref.base = c;
    ref.kappa = v.kappa_ref();
    ref.chi = v.cavity_count() == 2 ? v.chi_bar() : v.cavity(0).chi;
    ref.n0 = v.cavity(0).drive_flux;
    ref.r = c.source.r;
    return ref;
}

ReadoutConfig with_loss(ReadoutConfig c, const LossModel& loss) {
    c.loss = loss;
    return c;
}

// Three-protocol comparison at one integration time.
std::vector<CsvWriter::Cell> compare_protocols(const Reference& ref, double tau) {
    const auto& b = ref.base;
    const auto coh = validate(with_loss(coherent_config(ref.chi, ref.n0, tau, ref.kappa), b.loss));
    const double snr_coh = measurement_stats(coh).snr;

    const double e2r_max = std::exp(2.0 * ref.r);
    const auto single_base = validate(with_loss(single_mode_config(ref.chi, ref.n0, 0.0, 0.0, tau, ref.kappa), b.loss));
    auto sbase = single_base.into_config();
    sbase.protocol = Protocol::Coherent;
    const auto single = optimize_single_mode(validate(sbase), tau, e2r_max);

    double dchi = 0.0, dkappa = 0.0;
    if (b.cavities.size() == 2) {
        const auto v = validate(b);
        dchi = v.delta_chi();
        dkappa = v.delta_kappa();
    }
    auto q = with_loss(qmfs_config(ref.chi, ref.n0, ref.r, tau, ref.kappa, dchi, dkappa), b.loss);
    q.source.bandwidth = b.source.bandwidth;
    q.source.t0 = b.source.t0;
    const double snr_q = measurement_stats(validate(q)).snr;

    auto own = b;
    own.tau = tau;
    const auto s = measurement_stats(validate(own));
    return {tau,
            snr_coh,
            single.snr,
            std::exp(2.0 * single.r),
            single.theta,
            snr_q,
            s.snr,
            s.fidelity,
            s.signal_ground,
            s.signal_excited,
            s.noise_ground,
            s.noise_excited};
}

const std::vector<std::string> kCompareHeader{
    "kappa_tau",         "snr_coherent",       "snr_single_opt",    "e2r_single_opt",
    "theta_single_opt_rad", "snr_qmfs",        "snr_config",        "fidelity_config",
    "signal_ground",     "signal_excited",     "noise_ground",      "noise_excited"};

ReadoutConfig fig3a_default() {
    auto c = qmfs_config(0.5, 1.0, squeeze_r_from_power(100.0), 10.0);
    return c;
}

Result run_stats(const Options& o, const ReadoutConfig& cfg, Grid fallback) {
    const auto ref = reference_of(cfg);
    const auto grid = grid_or(o, fallback);
    Result res;
    res.config = cfg;
    res.grid = grid;
    res.table.header = kCompareHeader;
    res.table.rows = sweep(grid.points(), o.threads, [&](double t) { return compare_protocols(ref, t); });
    res.extra["single_mode_e2r_max"] = std::exp(2.0 * ref.r);
    return res;
}

Result cmd_fig3a(const Options& o) {
    const auto cfg = load_if_given(o).value_or(fig3a_default());
    return run_stats(o, cfg, Grid{0.1, 10.0, 41, true});
}

Result cmd_stats(const Options& o) { return run_stats(o, require_config(o), Grid{0.1, 10.0, 41, true}); }

ReadoutConfig fig3b_default() { return qmfs_config(0.5, 100.0, 0.0, 1.0); }

// tau for the target fidelity, QMFS vs photon-matched coherent, at eta = 1 and 0.9.
Result cmd_fig3b(const Options& o) {
    const auto cfg = load_if_given(o).value_or(fig3b_default());
    const auto ref = reference_of(cfg);
    const auto grid = grid_or(o, Grid{1.0, 1e4, 41, true});
    Result res;
    res.config = cfg;
    res.grid = grid;
    res.table.header = {"e2r",
                        "tau_qmfs_eta_1_in_inverse_kappa",
                        "tau_coherent_matched_eta_1_in_inverse_kappa",
                        "tau_qmfs_eta_0.9_in_inverse_kappa",
                        "tau_coherent_matched_eta_0.9_in_inverse_kappa"};
    res.table.rows = sweep(grid.points(), o.threads, [&](double e2r) {
        std::vector<CsvWriter::Cell> row{e2r};
        for (double eta : {1.0, 0.9}) {
            auto q = qmfs_config(ref.chi, ref.n0, squeeze_r_from_power(e2r), 1.0, ref.kappa);
            q.loss = LossModel{eta, cfg.loss.placement};
            const auto vq = validate(q);
            row.push_back(required_tau(vq, o.target_fidelity));
            row.push_back(required_tau(photon_matched_coherent(vq), o.target_fidelity));
        }
        return row;
    });
    res.extra["target_fidelity"] = o.target_fidelity;
    return res;
}

// Intracavity photons for the target fidelity versus tau.
Result cmd_fig3c(const Options& o) {
    const auto cfg = load_if_given(o).value_or(fig3a_default());
    const auto ref = reference_of(cfg);
    const double e2r_max = ref.r > 0.0 ? std::exp(2.0 * ref.r) : 100.0;
    const auto grid = grid_or(o, Grid{0.5, 20.0, 31, true});
    Result res;
    res.config = cfg;
    res.grid = grid;
    res.table.header = {"tau_in_inverse_kappa",  "nbar_coherent_eta_1",   "nbar_qmfs_eta_1",   "e2r_qmfs_eta_1",
                        "nbar_coherent_eta_0.9", "nbar_qmfs_eta_0.9", "e2r_qmfs_eta_0.9"};
    res.table.rows = sweep(grid.points(), o.threads, [&](double tau) {
        std::vector<CsvWriter::Cell> row{tau};
        for (double eta : {1.0, 0.9}) {
            const LossModel loss{eta, cfg.loss.placement};
            const auto coh = validate(with_loss(coherent_config(ref.chi, 1.0, tau, ref.kappa), loss));
            row.push_back(photons_for_fidelity(coh, tau, o.target_fidelity).n_bar);
            const auto q = validate(with_loss(qmfs_config(ref.chi, 1.0, 0.1, tau, ref.kappa), loss));
            const auto best = photons_for_fidelity(q, tau, o.target_fidelity, e2r_max);
            row.push_back(best.n_bar);
            row.push_back(std::exp(2.0 * best.r));
        }
        return row;
    });
    res.extra["target_fidelity"] = o.target_fidelity;
    res.extra["e2r_max"] = e2r_max;
    return res;
}

// SNR enhancement versus dispersive-shift asymmetry.
Result cmd_fig4a(const Options& o) {
    const auto cfg = load_if_given(o).value_or(fig3a_default());
    const auto ref = reference_of(cfg);
    const double tau = cfg.tau;
    const auto grid = grid_or(o, Grid{-0.1, 0.1, 41, false});
    Result res;
    res.config = cfg;
    res.grid = grid;
    res.table.header = {"delta_chi_over_chi_bar"};
    for (double dk : o.delta_kappas) res.table.header.push_back("enhancement_delta_kappa_" + format_double(dk));
    res.table.header.push_back("enhancement_optimal");
    res.table.header.push_back("delta_kappa_optimal_over_kappa_bar");
    const double reference = asymmetric_snr(0.0, ref.chi, ref.kappa, 0.0, tau, 0.0, ref.n0);
    res.table.rows = sweep(grid.points(), o.threads, [&](double x) {
        const double dchi = x * ref.chi;
        std::vector<CsvWriter::Cell> row{x};
        for (double dk : o.delta_kappas)
            row.push_back(asymmetric_snr(dchi, ref.chi, ref.kappa, dk * ref.kappa, tau, ref.r, ref.n0) / reference);
        const auto best = optimize_asymmetry(dchi, ref.chi, ref.kappa, tau, ref.r, ref.n0);
        row.push_back(best.enhancement);
        row.push_back(best.delta_kappa / ref.kappa);
        return row;
    });
    res.extra["reference"] = "symmetric coherent readout (delta_chi = delta_kappa = 0, r = 0)";
    res.extra["delta_kappa_over_kappa_bar"] = o.delta_kappas;
    return res;
}

// Transmon dispersive shifts of the reference two-resonator device.
Result cmd_fig4b(const Options& o) {
    const auto grid = grid_or(o, Grid{0.2, 0.6, 201, false});
    const auto spec = reference_device(0.3);
    Result res;
    res.grid = grid;
    res.table.header = {"E_C_GHz", "omega_q_GHz", "chi_1_MHz", "chi_2_MHz", "identified"};
    res.table.rows = sweep(grid.points(), o.threads, [&](double ec) {
        auto s = spec;
        s.E_C = ec;
        const auto d = dispersive_pair(spec, ec);
        return std::vector<CsvWriter::Cell>{ec, qubit_frequency(s), d.chi_1 * 1e3, d.chi_2 * 1e3,
                                            static_cast<long long>(d.identified)};
    });
    Json roots = Json::array();
    for (const auto& p : find_equal_opposite_all(spec, grid.points().front(), grid.points().back())) {
        roots.push_back({{"E_C_GHz", p.E_C},
                         {"chi_1_MHz", p.chi_1 * 1e3},
                         {"chi_2_MHz", p.chi_2 * 1e3},
                         {"delta_1_GHz", p.delta_1},
                         {"delta_2_GHz", p.delta_2},
                         {"straddling_pair", p.straddling_pair()}});
    }
    res.extra["equal_opposite_points"] = roots;
    res.extra["device"] = {{"E_J_GHz", spec.E_J},
                           {"omega_1_GHz", spec.resonators[0].omega},
                           {"omega_2_GHz", spec.resonators[1].omega},
                           {"g_1_GHz", spec.resonators[0].g},
                           {"g_2_GHz", spec.resonators[1].g},
                           {"charge_cutoff", spec.charge_cutoff},
                           {"photon_cutoff", spec.resonators[0].photon_cutoff}};
    return res;
}

Result cmd_optimize(const Options& o) {
    const auto cfg = require_config(o);
    const auto v = validate(cfg);
    Result res;
    res.config = cfg;
    res.table.header = {"quantity", "value", "unit"};
    auto add = [&](const std::string& q, double x, const std::string& unit) {
        res.table.rows.push_back({q, x, unit});
    };
    add("snr_config", measurement_stats(v).snr, "dimensionless");
    add("tau_required", required_tau(v, o.target_fidelity), "inverse_kappa");
    const auto photons = photons_for_fidelity(v, v.tau(), o.target_fidelity,
                                              cfg.source.r > 0.0 ? std::exp(2.0 * cfg.source.r) : 1e4);
    add("nbar_required", photons.n_bar, "photons");
    add("n0_required", photons.n0, "photons");
    add("e2r_at_nbar_required", std::exp(2.0 * photons.r), "dimensionless");
    if (v.cavity_count() == 1) {
        const double e2r_max = cfg.source.r > 0.0 ? std::exp(2.0 * cfg.source.r) : 1.0;
        const auto best = optimize_single_mode(v, v.tau(), e2r_max);
        add("e2r_single_opt", std::exp(2.0 * best.r), "dimensionless");
        add("theta_single_opt", best.theta, "rad");
        add("snr_single_opt", best.snr, "dimensionless");
    } else {
        const auto best = optimize_asymmetry(v.delta_chi(), v.chi_bar(), v.kappa_bar(), v.tau(), cfg.source.r,
                                             v.cavity(0).drive_flux);
        add("delta_kappa_opt", best.delta_kappa, "kappa");
        add("snr_asymmetry_opt", best.snr, "dimensionless");
        add("enhancement_asymmetry_opt", best.enhancement, "dimensionless");
        add("delta_kappa_balanced", balanced_delta_kappa(v.delta_chi(), v.chi_bar(), v.kappa_bar()), "kappa");
    }
    res.extra["target_fidelity"] = o.target_fidelity;
    return res;
}

Result cmd_trajectories(const Options& o) {
    const auto cfg = require_config(o);
    const auto v = validate(cfg);
    Scheme scheme;
    if (o.scheme == "euler")
        scheme = Scheme::EulerMaruyama;
    else if (o.scheme == "exact")
        scheme = Scheme::ExactGaussian;
    else
        throw CLI::ValidationError("--scheme", "expected 'euler' or 'exact'");
    double dt = o.dt;
    if (dt <= 0.0) dt = 1.0 / (50.0 * build_system(v, QubitState::Ground).max_rate());
    const auto ens = sample_records(v, o.n_traj, dt, o.seed, scheme, o.threads);
    const auto emp = empirical_stats(ens);
    const auto eng = measurement_stats(v);

    Result res;
    res.config = cfg;
    res.table.header = {"traj_id", "qubit_state", "M"};
    for (int i = 0; i < ens.n_traj; ++i) res.table.rows.push_back({static_cast<long long>(i), "ground", ens.ground[i]});
    for (int i = 0; i < ens.n_traj; ++i)
        res.table.rows.push_back({static_cast<long long>(i), "excited", ens.excited[i]});

    Table summary;
    summary.header = {"quantity", "empirical", "standard_error", "engine"};
    summary.rows = {
        {"signal_ground", emp.stats.signal_ground, emp.se_signal_ground, eng.signal_ground},
        {"signal_excited", emp.stats.signal_excited, emp.se_signal_excited, eng.signal_excited},
        {"noise_ground", emp.stats.noise_ground, emp.se_noise_ground, eng.noise_ground},
        {"noise_excited", emp.stats.noise_excited, emp.se_noise_excited, eng.noise_excited},
        {"snr", emp.stats.snr, emp.se_snr, eng.snr},
        {"error_rate", emp.error_rate, emp.se_error_rate, 1.0 - eng.fidelity},
    };
    res.side_tables.emplace_back("trajectories_summary", summary);
    res.extra["n_traj"] = o.n_traj;
    res.extra["dt_in_inverse_kappa"] = ens.dt;
    res.extra["scheme"] = o.scheme;
    return res;
}

Result cmd_heisenberg(const Options& o) {
    const auto best = snr_heisenberg_optimum(o.N, o.phi);
    Result res;
    res.table.header = {"N_photons", "phi_qb_rad", "N_s_opt_photons", "snr_opt", "snr_engine_at_opt", "kappa_tau"};
    res.table.rows.push_back(
        {o.N, o.phi, best.N_s, best.snr, engine_snr_for_budget(o.N, best.N_s, o.phi, o.kappa_tau), o.kappa_tau});
    return res;
}

void write_table(const fs::path& path, const Table& t) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot write '" + path.string() + "'");
    CsvWriter w(f, t.header);
    for (const auto& r : t.rows) w.row(r);
}

int run(const std::string& name, Result (*cmd)(const Options&), const Options& o) {
    const auto t0 = std::chrono::steady_clock::now();
    try {
        const Result res = cmd(o);
        const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const fs::path dir(o.out_dir);
        fs::create_directories(dir);
        write_table(dir / (name + ".csv"), res.table);
        Json outputs = Json::array({name + ".csv"});
        for (const auto& [side, table] : res.side_tables) {
            write_table(dir / (side + ".csv"), table);
            outputs.push_back(side + ".csv");
        }
        Json m;
        m["subcommand"] = name;
        m["version"] = kVersion;
        m["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION)
                                        + "." + std::to_string(EIGEN_MINOR_VERSION)},
                          {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "."
                                                + std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "."
                                                + std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                          {"cli11", CLI11_VERSION}};
        m["config"] = res.config ? config_to_json(*res.config) : Json(nullptr);
        m["config_path"] = o.config_path.empty() ? Json(nullptr) : Json(o.config_path);
        m["seed"] = o.seed;
        m["threads"] = o.threads;
        m["grid"] = res.grid ? Json(res.grid->spec()) : Json(nullptr);
        m["outputs"] = outputs;
        m["wall_time_s"] = wall;
        for (const auto& item : res.extra.items()) m[item.key()] = item.value();
        std::ofstream(dir / (name + ".manifest.json")) << m.dump(2) << '\n';
        return 0;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const Unreachable& e) {
        std::cerr << "unreachable: " << e.what() << '\n';
        return 3;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dispersive qubit readout with squeezed and two-mode squeezed input light"};
    app.require_subcommand(1);
    Options o;

    auto common = [&o](CLI::App* sub, bool grid) {
        sub->add_option("--config", o.config_path, "JSON readout config");
        sub->add_option("--out", o.out_dir, "output directory")->capture_default_str();
        sub->add_option("--seed", o.seed, "RNG seed")->capture_default_str();
        sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber)->capture_default_str();
        if (grid) sub->add_option("--grid", o.grid, "sweep grid start:stop:count[:log]");
    };

    struct Entry {
        const char* name;
        const char* help;
        Result (*cmd)(const Options&);
        bool grid;
    };
    const std::vector<Entry> entries{
        {"fig3a", "SNR vs kappa*tau for coherent, optimal single-mode and QMFS readout", cmd_fig3a, true},
        {"fig3b", "integration time for the target fidelity vs squeezing", cmd_fig3b, true},
        {"fig3c", "intracavity photons for the target fidelity vs tau", cmd_fig3c, true},
        {"fig4a", "SNR enhancement vs dispersive-shift asymmetry", cmd_fig4a, true},
        {"fig4b", "transmon dispersive shifts vs charging energy", cmd_fig4b, true},
        {"stats", "three-protocol comparison for a config over a kappa*tau grid", cmd_stats, true},
        {"optimize", "required tau, photons and optimal squeezing for a config", cmd_optimize, false},
        {"trajectories", "Monte Carlo homodyne records", cmd_trajectories, false},
        {"heisenberg", "optimal squeezing share of a photon budget", cmd_heisenberg, false},
    };
    std::vector<std::pair<CLI::App*, const Entry*>> subs;
    for (const auto& e : entries) {
        auto* sub = app.add_subcommand(e.name, e.help);
        common(sub, e.grid);
        subs.emplace_back(sub, &e);
    }
    for (auto& [sub, e] : subs) {
        const std::string n = e->name;
        if (n == "fig3b" || n == "fig3c" || n == "optimize")
            sub->add_option("--fidelity", o.target_fidelity, "target fidelity")->capture_default_str();
        if (n == "fig4a")
            sub->add_option("--delta-kappa", o.delta_kappas, "delta_kappa/kappa_bar curves")->capture_default_str();
        if (n == "trajectories") {
            sub->add_option("--n-traj", o.n_traj, "trajectories per qubit state")->capture_default_str();
            sub->add_option("--dt", o.dt, "time step in 1/kappa (default 1/(50 max rate))");
            sub->add_option("--scheme", o.scheme, "euler or exact")->capture_default_str();
        }
        if (n == "heisenberg") {
            sub->add_option("--N", o.N, "total photon budget")->required();
            sub->add_option("--phi", o.phi, "qubit rotation angle in rad")->capture_default_str();
            sub->add_option("--kappa-tau", o.kappa_tau, "kappa*tau of the engine check")->capture_default_str();
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    }
    for (auto& [sub, e] : subs)
        if (sub->parsed()) return run(e->name, e->cmd, o);
    return 1;
}
