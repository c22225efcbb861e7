// epchain_cli.cpp — command-line front end: spectrum sweeps, exceptional-point
// searches, survival-probability runs, power-law fits, and plot-script
// emission. Every run is described by a manifest that re-executes it
// bit-identically.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "epchain/dynamics.hpp"
#include "epchain/eppoints.hpp"
#include "epchain/fitting.hpp"
#include "epchain/greens.hpp"
#include "epchain/io.hpp"
#include "epchain/model.hpp"
#include "epchain/spectra.hpp"

namespace fs = std::filesystem;
using namespace epchain;
using io::RunManifest;
using nlohmann::json;

namespace {

struct Range {
    double lo{0.0}, hi{0.0}, step{0.0};
};

Range parse_range(const std::string& s) {
    Range r;
    char c1 = 0, c2 = 0;
    std::stringstream ss(s);
    if (!(ss >> r.lo >> c1 >> r.hi >> c2 >> r.step) || c1 != ':' || c2 != ':' || r.step <= 0.0)
        throw CLI::ValidationError("range must be lo:hi:step with step > 0, got '" + s + "'");
    return r;
}

std::pair<double, double> parse_window(const std::string& s) {
    double lo = 0.0, hi = 0.0;
    char c = 0;
    std::stringstream ss(s);
    if (!(ss >> lo >> c >> hi) || c != ':' || !(hi > lo))
        throw CLI::ValidationError("window must be lo:hi with hi > lo, got '" + s + "'");
    return {lo, hi};
}

void emit(RunManifest& man, const fs::path& dir, const std::string& name,
          const std::string& content) {
    fs::create_directories(dir);
    io::write_file(dir/name, content);
    man.record_file(name, content);
    std::cout << "wrote " << (dir/name).string() << "\n";
}

void finish(RunManifest& man, const fs::path& dir) {
    io::write_file(dir/"manifest.json", man.dump());
    std::cout << "wrote " << (dir/"manifest.json").string() << "\n";
}

std::vector<double> grid_from_params(const json& p) {
    const double t0 = p.at("tmin").get<double>(), t1 = p.at("tmax").get<double>();
    const int npts = p.at("points").get<int>();
    if (p.at("grid").get<std::string>() == "log") return dynamics::log_grid(t0, t1, npts);
    return dynamics::linear_grid(t0, t1, npts);
}

// ------------------------------ command handlers ------------------------------

void run_spectrum(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const double lo = p.at("param_lo").get<double>();
    const double hi = p.at("param_hi").get<double>();
    const double step = p.at("param_step").get<double>();
    std::vector<io::SpectrumRow> rows;
    for (double x = lo; x <= hi + 0.5*step; x += step) {
        const ModelSpec m = man.model.with_param(x);
        for (const auto& s : spectra::discrete_states(m)) rows.push_back({x, s});
    }
    const std::string csv = io::spectrum_csv(man, rows);
    emit(man, dir, "spectrum.csv", csv);
    if (p.value("plot", false)) {
        emit(man, dir, "spectrum.csv.py", io::plot_script_for(dir/"spectrum.csv"));
    }
    finish(man, dir);
}

void run_ep_locate(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto [lo, hi] = std::pair{man.parameters.at("window_lo").get<double>(),
                                    man.parameters.at("window_hi").get<double>()};
    const int pts = man.parameters.value("scan_points", 400);
    const auto eps = eppoints::locate_ep2(man.model, lo, hi, pts);
    if (eps.empty()) std::cout << "no exceptional points in window\n";
    emit(man, dir, "ep.csv", io::ep_csv(man, eps));
    finish(man, dir);
}

void run_ep_locate3(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const auto rec = eppoints::locate_ep3(man.model, p.at("g_lo").get<double>(),
                                          p.at("g_hi").get<double>(), p.at("eps_lo").get<double>(),
                                          p.at("eps_hi").get<double>());
    std::cout << "EP3" << rec.ep_type << " at g=" << io::num(rec.g) << " eps=" << io::num(rec.param)
              << " E=" << io::num(rec.E_bar.real()) << "\n";
    emit(man, dir, "ep.csv", io::ep_csv(man, {rec}));
    finish(man, dir);
}

void run_ep_puiseux(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const std::string var_s = p.at("variable").get<std::string>();
    eppoints::PuiseuxVariable var = eppoints::PuiseuxVariable::Energy;
    if (var_s == "lambda") var = eppoints::PuiseuxVariable::Lambda;
    else if (var_s == "norm") var = eppoints::PuiseuxVariable::Norm;
    else if (var_s != "energy") throw std::invalid_argument("variable must be energy|lambda|norm");

    std::vector<eppoints::EPRecord> eps;
    if (man.model.family == Family::SideDot) {
        eps = eppoints::locate_ep2(man.model, p.at("window_lo").get<double>(),
                                   p.at("window_hi").get<double>());
    } else {
        eps = eppoints::closed_form_eps(man.model);
    }
    const int index = p.value("index", 0);
    if (index < 0 || index >= int(eps.size()))
        throw std::invalid_argument("puiseux: EP index out of range (found " +
                                    std::to_string(eps.size()) + ")");
    const auto px = eppoints::puiseux(man.model, eps[index], var, p.value("order", 3));
    if (!px.warning.empty()) std::cerr << "warning: " << px.warning << "\n";
    emit(man, dir, "puiseux.csv", io::puiseux_csv(man, px));
    finish(man, dir);
}

void run_survival(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const auto grid = grid_from_params(p);
    const std::string method = p.at("method").get<std::string>();

    std::vector<dynamics::TimeSeries> series;
    if (method == "lattice" || method == "both") {
        const double t_max = *std::max_element(grid.begin(), grid.end());
        int nsites = p.value("nsites", 0);
        if (nsites == 0) nsites = dynamics::required_sites(man.model, t_max);
        series.push_back(dynamics::lattice_survival(man.model, grid, nsites));
    }
    if (method == "spectral" || method == "both")
        series.push_back(dynamics::spectral_survival(man.model, grid));
    if (method != "lattice" && method != "spectral" && method != "both")
        throw std::invalid_argument("method must be lattice|spectral|both");

    for (const auto& name : p.value("approximants", std::vector<std::string>{})) {
        const auto form = dynamics::approximant_from_name(name);
        if (form == dynamics::ApproximantForm::Ep3aLong) {
            const auto rec = eppoints::locate_ep3(man.model, 0.02, 0.4, -2.4, -1.5);
            series.push_back(dynamics::evaluate_approximant(form, man.model, grid, &rec));
        } else if (form == dynamics::ApproximantForm::Ep3aHalfPower) {
            const auto coeffs = p.at("halfpower_coeffs").get<std::vector<double>>();
            series.push_back(
                dynamics::evaluate_approximant(form, man.model, grid, nullptr, &coeffs));
        } else {
            series.push_back(dynamics::evaluate_approximant(form, man.model, grid));
        }
    }
    emit(man, dir, "survival.csv", io::survival_csv(man, series));
    if (p.value("plot", false))
        emit(man, dir, "survival.csv.py", io::plot_script_for(dir/"survival.csv"));
    finish(man, dir);
}

void run_fit(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const auto ts = io::read_survival_csv(p.at("input").get<std::string>(),
                                          p.value("method_filter", std::string{}));
    const double t0 = p.value("tmin", ts.times.front());
    const double t1 = p.value("tmax", ts.times.back());
    fitting::FitResult fit;
    if (p.at("basis").get<std::string>() == "integer")
        fit = fitting::fit_integer_powers(ts, t0, t1, p.value("degree", 6));
    else
        fit = fitting::fit_half_powers(ts, t0, t1);
    std::cout << "rms=" << io::num(fit.rms) << " condition=" << io::num(fit.condition) << "\n";
    emit(man, dir, "fit.csv", io::fit_csv(man, fit));
    if (p.value("plot", false)) emit(man, dir, "fit.csv.py", io::plot_script_for(dir/"fit.csv"));
    finish(man, dir);
}

void run_sweep(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const auto& p = man.parameters;
    const double g_lo = p.at("g_lo").get<double>(), g_hi = p.at("g_hi").get<double>();
    const double e_lo = p.at("eps_lo").get<double>(), e_hi = p.at("eps_hi").get<double>();
    const int steps = p.value("g_steps", 16);

    // independent parameter points fan out to a small worker pool; the CSV is
    // assembled by this single writer afterwards
    std::vector<std::future<std::vector<eppoints::EPRecord>>> jobs;
    for (int i = 0; i < steps; ++i) {
        const double g = g_lo + (g_hi - g_lo)*i/(steps - 1);
        jobs.push_back(std::async(std::launch::async, [=, model = man.model] {
            ModelSpec m = model;
            m.g = g;
            try {
                return eppoints::locate_ep2(m, e_lo, e_hi);
            } catch (const std::exception&) {
                return std::vector<eppoints::EPRecord>{};
            }
        }));
    }
    std::vector<eppoints::EPRecord> rows;
    for (auto& j : jobs)
        for (const auto& r : j.get()) rows.push_back(r);
    try {
        rows.push_back(eppoints::locate_ep3(man.model, g_lo, g_hi, e_lo, e_hi));
    } catch (const eppoints::ep_not_found_error& e) {
        std::cerr << "sweep: " << e.what() << "\n";
    }
    emit(man, dir, "sweep.csv", io::ep_csv(man, rows));
    finish(man, dir);
}

void run_plot(const RunManifest& man_in) {
    RunManifest man = man_in;
    const fs::path dir = man.output_dir;
    const fs::path csv = man.parameters.at("csv").get<std::string>();
    emit(man, dir, csv.filename().string() + ".py", io::plot_script_for(csv));
    finish(man, dir);
}

void execute(const RunManifest& man) {
    if (man.command == "spectrum") run_spectrum(man);
    else if (man.command == "ep-locate") run_ep_locate(man);
    else if (man.command == "ep-locate3") run_ep_locate3(man);
    else if (man.command == "ep-puiseux") run_ep_puiseux(man);
    else if (man.command == "survival") run_survival(man);
    else if (man.command == "fit") run_fit(man);
    else if (man.command == "sweep") run_sweep(man);
    else if (man.command == "plot") run_plot(man);
    else throw std::invalid_argument("unknown command in manifest: " + man.command);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"spectra, exceptional points and survival dynamics of dot-chain lattice models"};
    app.require_subcommand(0, 1);

    std::string manifest_path;
    app.add_option("--manifest", manifest_path, "re-execute a run from its manifest file");

    RunManifest man;
    std::string family = "hd";
    double g = 0.1, V = 0.5, eps_d = -2.0;
    int n = 4;
    std::string out = ".";
    auto add_model_flags = [&](CLI::App* cmd) {
        cmd->add_option("--family", family, "hq|hd|hn");
        cmd->add_option("--g", g, "chain coupling");
        cmd->add_option("--V", V, "intra-qubit coupling (hq)");
        cmd->add_option("--eps", eps_d, "dot potential (hd/hn)");
        cmd->add_option("--n", n, "attachment site (hn)");
        cmd->add_option("--out", out, "output directory");
    };
    auto make_model = [&] {
        ModelSpec m;
        m.family = family_from_name(family);
        m.g = g;
        m.V = V;
        m.eps_d = eps_d;
        m.n = n;
        m.validate();
        return m;
    };

    // spectrum
    auto* sp = app.add_subcommand("spectrum", "eigenvalue sweep over V or eps_d");
    std::string param_range = "0.1:2:0.01";
    bool plot = false;
    add_model_flags(sp);
    sp->add_option("--param-range", param_range, "lo:hi:step");
    sp->add_flag("--plot", plot, "also emit a plot script");
    sp->callback([&] {
        const Range r = parse_range(param_range);
        man = RunManifest{"spectrum", make_model(),
                          json{{"param_lo", r.lo}, {"param_hi", r.hi}, {"param_step", r.step},
                               {"plot", plot}},
                          out};
        execute(man);
    });

    // ep locate / locate3 / puiseux
    auto* ep = app.add_subcommand("ep", "exceptional point tools");
    ep->require_subcommand(1);
    auto* epl = ep->add_subcommand("locate", "bracket and refine EP2s in a parameter window");
    std::string window = "-2.2:-1.9";
    int scan_points = 400;
    add_model_flags(epl);
    epl->add_option("--window", window, "parameter window lo:hi");
    epl->add_option("--scan-points", scan_points, "scan grid size");
    epl->callback([&] {
        const auto [lo, hi] = parse_window(window);
        man = RunManifest{"ep-locate", make_model(),
                          json{{"window_lo", lo}, {"window_hi", hi}, {"scan_points", scan_points}},
                          out};
        execute(man);
    });

    auto* ep3 = ep->add_subcommand("locate3", "track EP2A branches to a third-order point");
    std::string gwin = "0.02:0.4", ewin = "-2.4:-1.5";
    add_model_flags(ep3);
    ep3->add_option("--gwin", gwin, "g window lo:hi");
    ep3->add_option("--ewin", ewin, "eps_d window lo:hi");
    ep3->callback([&] {
        const auto [glo, ghi] = parse_window(gwin);
        const auto [elo, ehi] = parse_window(ewin);
        man = RunManifest{"ep-locate3", make_model(),
                          json{{"g_lo", glo}, {"g_hi", ghi}, {"eps_lo", elo}, {"eps_hi", ehi}},
                          out};
        execute(man);
    });

    auto* epp = ep->add_subcommand("puiseux", "half-power expansion around an EP");
    std::string variable = "energy";
    int ep_index = 0, order = 3;
    add_model_flags(epp);
    epp->add_option("--variable", variable, "energy|lambda|norm");
    epp->add_option("--index", ep_index, "which EP (closed-form or window order)");
    epp->add_option("--order", order, "half-steps kept (1..3)");
    epp->add_option("--window", window, "search window for hn");
    epp->callback([&] {
        const auto [lo, hi] = parse_window(window);
        man = RunManifest{"ep-puiseux", make_model(),
                          json{{"variable", variable}, {"index", ep_index}, {"order", order},
                               {"window_lo", lo}, {"window_hi", hi}},
                          out};
        execute(man);
    });

    // survival
    auto* sv = app.add_subcommand("survival", "survival probability P(t)");
    std::string method = "spectral", gridkind = "linear";
    std::vector<std::string> approximants;
    std::vector<double> halfpower_coeffs;
    double tmin = 0.0, tmax = 50.0;
    int points = 501, nsites = 0;
    add_model_flags(sv);
    sv->add_option("--method", method, "lattice|spectral|both");
    sv->add_option("--approximant", approximants, "overlay closed-form approximants")
        ->take_all();
    sv->add_option("--coeffs", halfpower_coeffs, "C1..C6 for ep3a-halfpower")->expected(6);
    sv->add_option("--tmin", tmin);
    sv->add_option("--tmax", tmax);
    sv->add_option("--points", points);
    sv->add_option("--grid", gridkind, "linear|log");
    sv->add_option("--nsites", nsites, "lattice sites (0 = auto)");
    sv->add_flag("--plot", plot);
    sv->callback([&] {
        if (gridkind == "log" && tmin <= 0.0) tmin = 0.1;
        json params{{"tmin", tmin},   {"tmax", tmax},   {"points", points}, {"grid", gridkind},
                    {"method", method}, {"nsites", nsites}, {"plot", plot}};
        params["approximants"] = approximants;
        if (!halfpower_coeffs.empty()) params["halfpower_coeffs"] = halfpower_coeffs;
        man = RunManifest{"survival", make_model(), params, out};
        execute(man);
    });

    // fit
    auto* ft = app.add_subcommand("fit", "power-law fit of a survival CSV");
    std::string input, basis = "half", method_filter;
    double ftmin = 0.0, ftmax = 0.0;
    int degree = 6;
    ft->add_option("--input", input, "survival CSV")->required();
    ft->add_option("--basis", basis, "half|integer");
    ft->add_option("--degree", degree, "max integer power");
    ft->add_option("--method-filter", method_filter, "fit only this method's rows");
    ft->add_option("--tmin", ftmin);
    ft->add_option("--tmax", ftmax);
    ft->add_option("--out", out, "output directory");
    ft->callback([&] {
        json params{{"input", input}, {"basis", basis}, {"degree", degree}};
        if (!method_filter.empty()) params["method_filter"] = method_filter;
        if (ftmax > ftmin) {
            params["tmin"] = ftmin;
            params["tmax"] = ftmax;
        }
        man = RunManifest{"fit", ModelSpec{}, params, out};
        execute(man);
    });

    // sweep
    auto* sw = app.add_subcommand("sweep", "2-D (g, eps_d) EP3 search");
    int g_steps = 16;
    add_model_flags(sw);
    sw->add_option("--gwin", gwin, "g window lo:hi");
    sw->add_option("--ewin", ewin, "eps_d window lo:hi");
    sw->add_option("--gsteps", g_steps, "g grid size");
    sw->callback([&] {
        const auto [glo, ghi] = parse_window(gwin);
        const auto [elo, ehi] = parse_window(ewin);
        man = RunManifest{"sweep", make_model(),
                          json{{"g_lo", glo}, {"g_hi", ghi}, {"eps_lo", elo}, {"eps_hi", ehi},
                               {"g_steps", g_steps}},
                          out};
        execute(man);
    });

    // plot
    auto* pl = app.add_subcommand("plot", "emit a plot script for an artifact CSV");
    std::string csv_in;
    pl->add_option("--csv", csv_in, "artifact CSV")->required();
    pl->add_option("--out", out, "output directory");
    pl->callback([&] {
        man = RunManifest{"plot", ModelSpec{}, json{{"csv", csv_in}}, out};
        execute(man);
    });

    try {
        app.parse(argc, argv);
        if (!manifest_path.empty()) {
            std::ifstream f(manifest_path);
            if (!f) throw std::runtime_error("cannot open manifest " + manifest_path);
            std::stringstream ss;
            ss << f.rdbuf();
            execute(RunManifest::parse(ss.str()));
        } else if (app.get_subcommands().empty()) {
            std::cout << app.help();
        }
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "epchain: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
