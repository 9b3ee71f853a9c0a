// Command-line front end: ramps the chain to its critical point, samples
// observables on the hold stage, runs scaling scans with log-log fits, and
// cross-checks the mode pipeline against full 2^N integration. Output is
// data only (CSV tables, JSON scalars); plotting is left to external tools.
//
// Exit codes: 0 success, 2 configuration/validation error, 3 numerical
// failure (integration or a failed oracle certification).
//
// Determinism: every number is printed with %.17g through the same
// formatter the library uses, and all reductions are fixed-order, so a
// given configuration produces byte-identical files at any thread count.

#include <cmath>
#include <complex>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "kzising/analysis.hpp"
#include "kzising/ed_oracle.hpp"

using namespace kzising;

namespace {

// JSON face for CLI11's config-file hook: top-level keys set global flags,
// one nested object per subcommand sets that subcommand's flags, arrays
// feed multi-value options.
class JsonConfig : public CLI::Config {
  public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(input);
        } catch (const nlohmann::json::parse_error& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config root must be a JSON object");
        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                for (const auto& [name, leaf] : value.items())
                    items.push_back(make_item({key}, name, leaf));
            } else {
                items.push_back(make_item({}, key, value));
            }
        }
        return items;
    }

  private:
    static CLI::ConfigItem make_item(std::vector<std::string> parents, const std::string& name,
                                     const nlohmann::json& leaf) {
        CLI::ConfigItem item;
        item.parents = std::move(parents);
        item.name = name;
        if (leaf.is_array())
            for (const auto& v : leaf) item.inputs.push_back(scalar(v));
        else
            item.inputs.push_back(scalar(leaf));
        return item;
    }

    static std::string scalar(const nlohmann::json& v) {
        if (v.is_string()) return v.get<std::string>();
        return v.dump();
    }
};

struct CommonOpts {
    int n = 2000;
    double tau_q = 100.0;
    double g_start = 5.0;
    double tol = 1e-10;
    std::string output;  // overrides the computed file stem
};

std::string num_token(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", x);
    return buf;
}

std::string stem_or(const std::string& output, const std::string& fallback) {
    if (output.empty()) return fallback;
    std::string s = output;
    if (s.size() > 4 && s.compare(s.size() - 4, 4, ".csv") == 0) s.resize(s.size() - 4);
    return s;
}

std::string cell_tag(int n, double tau_q) {
    return "_n" + std::to_string(n) + "_tq" + num_token(tau_q);
}

void write_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path.string());
    f << content;
    std::cout << "wrote " << path.string() << "\n";
}

std::string sci(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3e", x);
    return buf;
}

// ---- quench ----------------------------------------------------------

struct QuenchOpts : CommonOpts {
    bool approx = false;
    bool amplitudes = false;
};

int run_quench(const QuenchOpts& o, const std::filesystem::path& outdir) {
    const auto grid = build_grid(o.n);
    std::string modes_csv = "k,p_k,P_k\n";
    std::string amps_csv = "k,re_v,im_v,re_u,im_u\n";
    double p_gs = 0.0, log_p_gs = 0.0, sz0 = 0.0;

    if (o.approx) {
        const auto amps = approx_amplitudes(grid, o.tau_q);
        for (std::size_t i = 0; i < grid.momenta.size(); ++i) {
            const double k = grid.momenta[i];
            const double p = approx_excitation_probability(k * std::sqrt(o.tau_q));
            modes_csv += format_double(k) + ',' + format_double(p) + ',' +
                         format_double(1.0 - p) + '\n';
            amps_csv += format_double(k) + ',' + format_double(amps.v[i].real()) + ',' +
                        format_double(amps.v[i].imag()) + ',' + format_double(amps.u[i].real()) +
                        ',' + format_double(amps.u[i].imag()) + '\n';
        }
        p_gs = approx_ground_state_probability(o.n, o.tau_q);
        log_p_gs = std::log(p_gs);
        sz0 = 2.0 / std::numbers::pi + sz_leading_series(grid, o.tau_q, 0.0);
    } else {
        const auto state = drive_to_critical({o.tau_q, o.g_start}, grid, o.tol);
        const auto p = excitation_probabilities(state);
        const auto pg = ground_probabilities_per_mode(state);
        for (std::size_t i = 0; i < grid.momenta.size(); ++i) {
            modes_csv += format_double(grid.momenta[i]) + ',' + format_double(p[i]) + ',' +
                         format_double(pg[i]) + '\n';
            amps_csv += format_double(grid.momenta[i]) + ',' + format_double(state.v[i].real()) +
                        ',' + format_double(state.v[i].imag()) + ',' +
                        format_double(state.u[i].real()) + ',' +
                        format_double(state.u[i].imag()) + '\n';
        }
        const auto gs = ground_state_probability(state);
        p_gs = gs.value;
        log_p_gs = gs.log_value;
        sz0 = transverse_magnetization(state);
    }

    const std::string stem =
        stem_or(o.output, std::string("quench") + (o.approx ? "_approx" : "") +
                              cell_tag(o.n, o.tau_q));
    const std::string summary =
        std::string("{\n") +                                                        //
        "  \"N\": " + std::to_string(o.n) + ",\n" +                                 //
        "  \"tau_Q\": " + format_double(o.tau_q) + ",\n" +                          //
        "  \"g_start\": " + format_double(o.g_start) + ",\n" +                      //
        "  \"approx\": " + (o.approx ? "true" : "false") + ",\n" +                  //
        "  \"p_gs\": " + format_double(p_gs) + ",\n" +                              //
        "  \"log_p_gs\": " + format_double(log_p_gs) + ",\n" +                      //
        "  \"sz0\": " + format_double(sz0) + ",\n" +                                //
        "  \"sz0_minus_2_over_pi\": " + format_double(sz0 - 2.0 / std::numbers::pi) +
        "\n}\n";

    write_text(outdir / (stem + ".csv"), modes_csv);
    write_text(outdir / (stem + "_summary.json"), summary);
    if (o.amplitudes) write_text(outdir / (stem + "_amplitudes.csv"), amps_csv);
    std::cout << summary;
    return 0;
}

// ---- evolve ----------------------------------------------------------

struct EvolveOpts : CommonOpts {
    std::string obs = "sz";  // sz | echo
    std::string approx_form;  // sz-series | sz-train | echo-product | echo-revivals
    double t_max = 0.0;       // 0 = family default
    double dt = 0.0;          // 0 = family default
    bool linearized = false;
    bool power_one_over_n = false;
};

int run_evolve(const EvolveOpts& o, const std::filesystem::path& outdir) {
    const bool approx = !o.approx_form.empty();
    Observable approx_id = Observable::SzSeries;
    if (o.approx_form == "sz-series") approx_id = Observable::SzSeries;
    else if (o.approx_form == "sz-train") approx_id = Observable::SzTrain;
    else if (o.approx_form == "echo-product") approx_id = Observable::EchoProduct;
    else if (o.approx_form == "echo-revivals") approx_id = Observable::EchoRevivals;

    const bool echo_family = approx ? (approx_id == Observable::EchoProduct ||
                                       approx_id == Observable::EchoRevivals)
                                    : (o.obs == "echo");
    if (o.linearized && approx)
        throw std::invalid_argument("--linearized-dispersion applies to the exact evolution only");
    if (o.power_one_over_n && !echo_family)
        throw std::invalid_argument("--power-one-over-n requires an echo observable");

    const double t_max = o.t_max > 0.0 ? o.t_max : (echo_family ? 2.6 : 1.65) * o.n;
    const double dt = o.dt > 0.0 ? o.dt
                                 : (echo_family ? (o.tau_q <= 100.0 ? 0.1 : 0.25)
                                                : (o.tau_q <= 200.0 ? 0.25 : 0.5));
    const Dispersion kind = o.linearized ? Dispersion::linearized : Dispersion::exact;

    TimeSeries series;
    if (approx) {
        series = approx_timeseries(approx_id, build_grid(o.n), o.tau_q, t_max, dt);
    } else {
        const auto state = drive_to_critical({o.tau_q, o.g_start}, build_grid(o.n), o.tol);
        series = echo_family ? echo_series(state, t_max, dt, kind)
                             : sz_series(state, t_max, dt, kind);
    }
    if (o.power_one_over_n) {
        for (std::size_t i = 0; i < series.t.size(); ++i) {
            series.logvalue[i] /= o.n;
            series.value[i] = std::exp(series.logvalue[i]);
        }
    }

    const std::string stem = stem_or(
        o.output, std::string("evolve_") + observable_name(series.observable) +
                      cell_tag(o.n, o.tau_q) + (o.linearized ? "_linearized" : "") +
                      (o.power_one_over_n ? "_pow1overN" : ""));
    write_text(outdir / (stem + ".csv"), timeseries_csv(series));
    return 0;
}

// ---- scan ------------------------------------------------------------

struct ScanOpts : CommonOpts {
    std::string vary;         // tauq | n
    std::string obs = "pgs";  // pgs | peak-amplitude | echo-width
    std::vector<double> values;
};

int run_scan(const ScanOpts& o, const std::filesystem::path& outdir) {
    ScanSelector sel = ScanSelector::ground_state;
    std::string obs_token = "pgs";
    if (o.obs == "peak-amplitude") {
        sel = ScanSelector::peak_amplitude;
        obs_token = "peak_amplitude";
    } else if (o.obs == "echo-width") {
        sel = ScanSelector::echo_width;
        obs_token = "echo_width";
    }

    std::vector<double> values = o.values;
    if (values.empty()) {
        if (o.vary == "n") values = {1000, 1400, 2000, 2800, 4000};
        else if (sel == ScanSelector::ground_state) values = {30, 60, 120, 250, 500};
        else if (sel == ScanSelector::peak_amplitude) values = {50, 100, 200, 400, 800};
        else values = {100, 200, 400, 800};
    }

    std::vector<ScanRow> rows;
    std::string tag;
    if (o.vary == "n") {
        std::vector<int> sizes;
        for (double v : values) {
            const int n = static_cast<int>(v);
            if (static_cast<double>(n) != v)
                throw std::invalid_argument("scan --vary n: sizes must be integers");
            sizes.push_back(n);
        }
        rows = scan_system_size(o.tau_q, sizes, sel, o.tol);
        tag = "_tq" + num_token(o.tau_q);
    } else {
        rows = scan_tau_q(o.n, values, sel, o.tol);
        tag = "_n" + std::to_string(o.n);
    }

    // log-log fits against the varied parameter
    std::vector<double> x = values;
    auto column = [&](auto getter) {
        std::vector<double> y;
        for (const auto& r : rows) y.push_back(getter(r));
        return y;
    };
    const std::string xname = (o.vary == "n") ? "N" : "tau_Q";
    std::string fits = "{\n  \"vary\": \"" + xname + "\"";
    if (sel == ScanSelector::ground_state) {
        const auto f1 = loglog_fit(x, column([](const ScanRow& r) { return -std::log(r.p_gs); }));
        const auto f2 = loglog_fit(x, column([](const ScanRow& r) { return r.sz0_minus_2pi; }));
        fits += ",\n  \"fit_neg_log_pgs\": " + fit_json(f1);
        fits += ",\n  \"fit_sz0_minus_2pi\": " + fit_json(f2);
    } else if (sel == ScanSelector::peak_amplitude) {
        const auto fa = loglog_fit(x, column([](const ScanRow& r) { return r.a; }));
        const auto fw = loglog_fit(x, column([](const ScanRow& r) { return r.w; }));
        fits += ",\n  \"fit_A\": " + fit_json(fa);
        fits += ",\n  \"fit_W\": " + fit_json(fw);
    } else {
        const auto ft = loglog_fit(x, column([](const ScanRow& r) { return r.wtilde; }));
        fits += ",\n  \"fit_Wtilde\": " + fit_json(ft);
    }
    fits += "\n}\n";

    const std::string stem =
        stem_or(o.output, "scan_" + obs_token + "_vs_" + o.vary + tag);
    write_text(outdir / (stem + ".csv"), scan_csv(rows));
    write_text(outdir / (stem + "_fits.json"), fits);
    std::cout << fits;
    return 0;
}

// ---- oracle ----------------------------------------------------------

struct OracleOpts {
    int n = 6;
    double tau_q = 10.0;
    double g_start = 5.0;
    double tol = 1e-12;
    double t_max = 0.0;  // 0 = 2N
    double dt = 0.25;
};

int run_oracle(const OracleOpts& o) {
    const double t_max = o.t_max > 0.0 ? o.t_max : 2.0 * o.n;
    const auto run = oracle_run(o.n, o.tau_q, o.g_start, t_max, o.dt, o.tol);
    const auto state = drive_to_critical({o.tau_q, o.g_start}, build_grid(o.n), o.tol);
    const auto sz_f = sz_series(state, t_max, o.dt);
    const auto echo_f = echo_series(state, t_max, o.dt);

    double dsz = 0.0, dl = 0.0;
    for (std::size_t i = 0; i < sz_f.t.size(); ++i) {
        dsz = std::max(dsz, std::abs(run.sz.value[i] - sz_f.value[i]));
        dl = std::max(dl, std::abs(run.echo.value[i] - echo_f.value[i]));
    }
    double de = 0.0;
    for (double k : build_grid(o.n).momenta) de -= mode_energy(k, 1.0);
    de = std::abs(ed_ground_state(o.n, 1.0).energy - de);

    std::cout << "oracle: N=" << o.n << " tau_Q=" << num_token(o.tau_q)
              << " g_start=" << num_token(o.g_start) << " dt=" << num_token(o.dt)
              << " t in [0, " << num_token(t_max) << "]\n";
    bool ok = true;
    auto line = [&ok](const std::string& label, double value, double bound) {
        const bool pass = value < bound;
        ok = ok && pass;
        std::cout << (pass ? "[PASS] " : "[FAIL] ") << label << " = " << sci(value)
                  << " (bound " << sci(bound) << ")\n";
    };
    line("critical ground energy |ED - mode sum|", de, 1e-10);
    line("max |dSz| vs mode pipeline", dsz, 1e-7);
    line("max |dL| vs mode pipeline", dl, 1e-7);
    std::cout << "info: max norm drift = " << sci(run.max_norm_drift)
              << ", max parity error = " << sci(run.max_parity_error)
              << ", p_gs(ED) = " << format_double(run.ground_state_probability) << "\n";
    std::cout << (ok ? "oracle: PASS\n" : "oracle: FAIL\n");
    return ok ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "Transverse-field Ising chain driven linearly to its critical point: "
        "excitation spectra, magnetization and echo dynamics, scaling scans, "
        "and a full 2^N cross-check."};
    app.require_subcommand(1);
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "",
                   "JSON config file: top-level keys set global flags, one nested "
                   "object per subcommand sets its flags");

    std::string outdir = ".";
    int threads = 0;
    app.add_option("--outdir", outdir, "Directory for output files (created if missing)")
        ->envname("KZISING_OUTDIR");
    app.add_option("--threads", threads, "Cap the OpenMP worker count (0 = library default)");

    QuenchOpts q;
    auto* quench = app.add_subcommand(
        "quench", "Ramp to the critical point; write per-mode probabilities and scalars");
    quench->fallthrough();
    quench->add_option("--n", q.n, "Number of spins (even, >= 4)");
    quench->add_option("--tauq", q.tau_q, "Quench time tau_Q");
    quench->add_option("--gstart", q.g_start, "Initial transverse field (> 1)");
    quench->add_option("--tol", q.tol, "End-to-end integration tolerance");
    quench->add_flag("--approx", q.approx, "Use the closed-form scaling amplitudes instead");
    quench->add_flag("--amplitudes", q.amplitudes, "Also dump (k, Re v, Im v, Re u, Im u)");
    quench->add_option("-o,--output", q.output, "Output file stem (default: content-named)");

    EvolveOpts e;
    auto* evolve = app.add_subcommand(
        "evolve", "Hold at the critical point; write an observable time series");
    evolve->fallthrough();
    evolve->add_option("--n", e.n, "Number of spins (even, >= 4)");
    evolve->add_option("--tauq", e.tau_q, "Quench time tau_Q");
    evolve->add_option("--gstart", e.g_start, "Initial transverse field (> 1)");
    evolve->add_option("--tol", e.tol, "End-to-end integration tolerance");
    evolve->add_option("--obs", e.obs, "Observable: sz | echo")
        ->check(CLI::IsMember({"sz", "echo"}));
    evolve->add_option("--approx", e.approx_form,
                       "Closed-form curve instead of the exact evolution")
        ->check(CLI::IsMember({"sz-series", "sz-train", "echo-product", "echo-revivals"}));
    evolve->add_option("--tmax", e.t_max, "Series length (default 1.65N for sz, 2.6N for echo)");
    evolve->add_option("--dt", e.dt, "Sample step (default 0.25/0.5 sz, 0.1/0.25 echo)");
    evolve->add_flag("--linearized-dispersion", e.linearized,
                     "Evolve with eps = 2k (exactly N/2-periodic diagnostic)");
    evolve->add_flag("--power-one-over-n", e.power_one_over_n,
                     "Write L^(1/N) instead of L (echo only)");
    evolve->add_option("-o,--output", e.output, "Output file stem (default: content-named)");

    ScanOpts s;
    auto* scan = app.add_subcommand(
        "scan", "Sweep tau_Q or N, tabulate observables, fit the scaling exponents");
    scan->fallthrough();
    scan->add_option("--vary", s.vary, "Swept parameter: tauq | n")
        ->required()
        ->check(CLI::IsMember({"tauq", "n"}));
    scan->add_option("--obs", s.obs, "Selector: pgs | peak-amplitude | echo-width")
        ->check(CLI::IsMember({"pgs", "peak-amplitude", "echo-width"}));
    scan->add_option("--n", s.n, "Fixed N when varying tau_Q");
    scan->add_option("--tauq", s.tau_q, "Fixed tau_Q when varying N");
    scan->add_option("--tol", s.tol, "End-to-end integration tolerance");
    scan->add_option("--values", s.values, "Explicit grid (default: the documented grid)")
        ->delimiter(',');
    scan->add_option("-o,--output", s.output, "Output file stem (default: content-named)");

    OracleOpts oc;
    auto* oracle = app.add_subcommand(
        "oracle", "Certify the mode pipeline against full 2^N integration (N <= 10)");
    oracle->fallthrough();
    oracle->add_option("--n", oc.n, "Number of spins (even, 4..10)");
    oracle->add_option("--tauq", oc.tau_q, "Quench time tau_Q");
    oracle->add_option("--gstart", oc.g_start, "Initial transverse field (> 1)");
    oracle->add_option("--tol", oc.tol, "End-to-end integration tolerance (both pipelines)");
    oracle->add_option("--tmax", oc.t_max, "Comparison window (default 2N)");
    oracle->add_option("--dt", oc.dt, "Comparison grid step");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& err) {
        return app.exit(err);
    } catch (const CLI::ParseError& err) {
        app.exit(err);
        return 2;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(threads);
#endif

    try {
        const std::filesystem::path out{outdir};
        if (!out.empty()) std::filesystem::create_directories(out);
        if (app.got_subcommand(quench)) return run_quench(q, out);
        if (app.got_subcommand(evolve)) return run_evolve(e, out);
        if (app.got_subcommand(scan)) return run_scan(s, out);
        return run_oracle(oc);
    } catch (const std::invalid_argument& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 3;
    }
}
