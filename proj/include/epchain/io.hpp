// io.hpp — CSV artifacts (17 significant digits, checksum comment line), the
// run manifest, and standalone plot-script emission.

#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "epchain/dynamics.hpp"
#include "epchain/eppoints.hpp"
#include "epchain/fitting.hpp"
#include "epchain/model.hpp"
#include "epchain/spectra.hpp"

namespace epchain::io {

using nlohmann::json;

// ------------------------------- formatting ------------------------------------

// Round-trip safe for doubles.
inline std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex64(std::uint64_t v) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

// ------------------------------- manifest --------------------------------------

// Everything needed to re-execute a run bit-identically: the command, the
// model, and the command-specific parameters. Emitted-file checksums are
// appended after the artifacts are written.
struct RunManifest {
    std::string command;
    ModelSpec model;
    json parameters = json::object();
    std::string output_dir = ".";
    std::vector<std::pair<std::string, std::string>> files;  // (name, checksum)

    json core_json() const {
        json j;
        j["command"] = command;
        j["model"] = {{"family", family_name(model.family)},
                      {"g", model.g},
                      {"V", model.V},
                      {"eps_d", model.eps_d},
                      {"n", model.n}};
        j["parameters"] = parameters;
        return j;
    }

    // Identifies the computation (not the destination): runs that differ only
    // in output_dir emit byte-identical artifacts.
    std::string checksum() const { return hex64(fnv1a64(core_json().dump())); }

    void record_file(const std::string& name, const std::string& content) {
        files.emplace_back(name, hex64(fnv1a64(content)));
    }

    std::string dump() const {
        json j = core_json();
        j["output_dir"] = output_dir;
        j["files"] = json::array();
        for (const auto& [name, sum] : files) j["files"].push_back({{"name", name}, {"fnv1a64", sum}});
        return j.dump(2) + "\n";
    }

    static RunManifest parse(const std::string& text) {
        const json j = json::parse(text);
        RunManifest m;
        m.command = j.at("command").get<std::string>();
        const auto& jm = j.at("model");
        m.model.family = family_from_name(jm.at("family").get<std::string>());
        m.model.g = jm.at("g").get<double>();
        m.model.V = jm.at("V").get<double>();
        m.model.eps_d = jm.at("eps_d").get<double>();
        m.model.n = jm.at("n").get<int>();
        m.parameters = j.at("parameters");
        m.output_dir = j.value("output_dir", ".");
        return m;
    }
};

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    f << content;
}

// ------------------------------- CSV writers -----------------------------------

inline std::string csv_preamble(const RunManifest& man, const std::string& header) {
    return "# manifest_checksum=" + man.checksum() + "\n" + header + "\n";
}

struct SpectrumRow {
    double param;
    spectra::DiscreteState state;
};

inline std::string spectrum_csv(const RunManifest& man, const std::vector<SpectrumRow>& rows) {
    std::string s = csv_preamble(man, "param_value,re_E,im_E,re_lambda,im_lambda,class");
    for (const auto& r : rows)
        s += num(r.param) + "," + num(r.state.energy.real()) + "," + num(r.state.energy.imag()) +
             "," + num(r.state.lambda.real()) + "," + num(r.state.lambda.imag()) + "," +
             spectra::state_class_name(r.state.cls) + "\n";
    return s;
}

inline std::string ep_csv(const RunManifest& man, const std::vector<eppoints::EPRecord>& eps) {
    std::string s = csv_preamble(man, "family,n,g,param,re_E,im_E,order,type,gap");
    for (const auto& e : eps)
        s += std::string(family_name(e.family)) + "," + std::to_string(e.n) + "," + num(e.g) + "," +
             num(e.param) + "," + num(e.E_bar.real()) + "," + num(e.E_bar.imag()) + "," +
             std::to_string(e.order) + "," + e.ep_type + "," + num(e.gap) + "\n";
    return s;
}

inline std::string survival_csv(const RunManifest& man,
                                const std::vector<dynamics::TimeSeries>& series) {
    std::string s = csv_preamble(man, "t,P,method,model_family,g,param");
    for (const auto& ts : series)
        for (std::size_t i = 0; i < ts.times.size(); ++i)
            s += num(ts.times[i]) + "," + num(ts.values[i]) + "," + ts.method + "," +
                 family_name(ts.model.family) + "," + num(ts.model.g) + "," +
                 num(ts.model.param()) + "\n";
    return s;
}

inline std::string fit_csv(const RunManifest& man, const fitting::FitResult& fit) {
    std::string s = csv_preamble(man, "exponent,coefficient");
    for (std::size_t i = 0; i < fit.exponents.size(); ++i)
        s += num(fit.exponents[i]) + "," + num(fit.coefficients[i]) + "\n";
    s += "# rms=" + num(fit.rms) + ",t_min=" + num(fit.t_min) + ",t_max=" + num(fit.t_max) +
         ",condition=" + num(fit.condition) + "\n";
    return s;
}

inline std::string puiseux_csv(const RunManifest& man, const eppoints::PuiseuxExpansion& px) {
    std::string s = csv_preamble(man, "half_power,re_coeff,im_coeff");
    for (const auto& [k, c] : px.coeff)
        s += num(0.5*k) + "," + num(c.real()) + "," + num(c.imag()) + "\n";
    return s;
}

// ------------------------------ survival CSV input ------------------------------

// Reads one method's series back from a survival CSV (for the fit command).
inline dynamics::TimeSeries read_survival_csv(const std::filesystem::path& path,
                                              const std::string& method = "") {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    dynamics::TimeSeries ts;
    ts.method = method;
    bool header_seen = false;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (!header_seen) {
            if (line.rfind("t,P,method", 0) != 0)
                throw std::runtime_error("not a survival CSV: " + path.string());
            header_seen = true;
            continue;
        }
        std::stringstream ss(line);
        std::string t, P, meth;
        std::getline(ss, t, ',');
        std::getline(ss, P, ',');
        std::getline(ss, meth, ',');
        if (!method.empty() && meth != method) continue;
        if (ts.method.empty()) ts.method = meth;
        if (meth != ts.method) continue;  // first method group wins
        ts.times.push_back(std::stod(t));
        ts.values.push_back(std::stod(P));
    }
    if (ts.times.empty()) throw std::runtime_error("no samples read from " + path.string());
    return ts;
}

// ------------------------------- plot scripts -----------------------------------

// Standalone matplotlib script for a recognized CSV schema; axes follow the
// series type (survival: linear and log-log panels; spectrum: Re E vs the
// parameter with band-edge guides; fit: residuals over the window).
inline std::string plot_script_for(const std::filesystem::path& csv_path) {
    std::ifstream f(csv_path);
    if (!f) throw std::runtime_error("cannot open " + csv_path.string());
    std::string first, header;
    std::getline(f, first);
    if (first.rfind("#", 0) == 0)
        std::getline(f, header);
    else
        header = first;

    std::string s = "#!/usr/bin/env python3\nimport csv\nimport matplotlib.pyplot as plt\n\n";
    s += "rows = []\nwith open(" + std::string("\"") + csv_path.filename().string() +
         "\") as f:\n    for r in csv.reader(l for l in f if not l.startswith('#')):\n"
         "        rows.append(r)\nhead, data = rows[0], rows[1:]\n\n";
    if (header.rfind("t,P,method", 0) == 0) {
        s += "series = {}\nfor r in data:\n"
             "    series.setdefault(r[2], ([], []))\n"
             "    series[r[2]][0].append(float(r[0]))\n"
             "    series[r[2]][1].append(float(r[1]))\n"
             "fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(10, 4))\n"
             "for name, (t, P) in series.items():\n"
             "    ax1.plot(t, P, label=name)\n"
             "    ax2.loglog(t, P, label=name)\n"
             "ax1.set_xlabel('t [1/J]'); ax1.set_ylabel('P(t)'); ax1.legend()\n"
             "ax2.set_xlabel('t [1/J]'); ax2.set_ylabel('P(t)'); ax2.legend()\n"
             "plt.tight_layout()\nplt.savefig('survival.png', dpi=160)\n";
    } else if (header.rfind("param_value,", 0) == 0) {
        s += "x = [float(r[0]) for r in data]\nreE = [float(r[1]) for r in data]\n"
             "fig, ax = plt.subplots(figsize=(6, 4.5))\n"
             "ax.plot(x, reE, '.', ms=2)\n"
             "ax.axhline(2.0, color='gray', lw=0.8)\nax.axhline(-2.0, color='gray', lw=0.8)\n"
             "ax.set_xlabel('parameter'); ax.set_ylabel('Re E')\n"
             "plt.tight_layout()\nplt.savefig('spectrum.png', dpi=160)\n";
    } else if (header.rfind("exponent,", 0) == 0) {
        s += "exps = [float(r[0]) for r in data]\ncoefs = [float(r[1]) for r in data]\n"
             "fig, ax = plt.subplots(figsize=(6, 4.5))\n"
             "ax.bar([str(e) for e in exps], coefs)\n"
             "ax.set_xlabel('exponent'); ax.set_ylabel('coefficient')\n"
             "plt.tight_layout()\nplt.savefig('fit.png', dpi=160)\n";
    } else {
        throw std::runtime_error("plot_script_for: unrecognized CSV schema in " +
                                 csv_path.string());
    }
    return s;
}

}  // namespace epchain::io
