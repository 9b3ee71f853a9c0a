#pragma once

// Sampled observable with provenance metadata, plus its CSV form.
//
// CSV layout: '#'-prefixed metadata lines, a header row, then one row per
// sample. Echo series carry a third column with the log value, which is
// the primary quantity (the echo itself underflows between revivals at
// large N). Numbers are written with %.17g so reruns are byte-identical.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace kzising {

enum class Observable {
    Sz,
    LoschmidtEcho,
    LogLoschmidtEcho,
    // closed-form approximation curves, same schema
    SzSeries,
    SzTrain,
    EchoProduct,
    EchoRevivals,
    // full 2^N cross-check, same schema
    SzEd,
    LoschmidtEchoEd,
};

inline const char* observable_name(Observable o) {
    switch (o) {
        case Observable::Sz: return "Sz";
        case Observable::LoschmidtEcho: return "LoschmidtEcho";
        case Observable::LogLoschmidtEcho: return "LogLoschmidtEcho";
        case Observable::SzSeries: return "SzSeries";
        case Observable::SzTrain: return "SzTrain";
        case Observable::EchoProduct: return "EchoProduct";
        case Observable::EchoRevivals: return "EchoRevivals";
        case Observable::SzEd: return "Sz_ed";
        case Observable::LoschmidtEchoEd: return "LoschmidtEcho_ed";
    }
    return "unknown";
}

struct TimeSeries {
    Observable observable = Observable::Sz;
    std::vector<double> t;
    std::vector<double> value;     // S^z or L
    std::vector<double> logvalue;  // ln L; empty for S^z series
    // metadata
    int n_spins = 0;
    double tau_q = 0.0;
    double g_start = 0.0;
    double dt = 0.0;  // sampler step
};

inline std::string format_double(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

inline std::string timeseries_csv(const TimeSeries& s) {
    std::string out;
    out += "# N = " + std::to_string(s.n_spins) + "\n";
    out += "# tau_Q = " + format_double(s.tau_q) + "\n";
    out += "# g_start = " + format_double(s.g_start) + "\n";
    out += "# observable = " + std::string(observable_name(s.observable)) + "\n";
    out += "# dt = " + format_double(s.dt) + "\n";
    const bool with_log = !s.logvalue.empty();
    out += with_log ? "t,value,logvalue\n" : "t,value\n";
    for (std::size_t i = 0; i < s.t.size(); ++i) {
        out += format_double(s.t[i]);
        out += ',';
        out += format_double(s.value[i]);
        if (with_log) {
            out += ',';
            out += format_double(s.logvalue[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_timeseries_csv(const TimeSeries& s, const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << timeseries_csv(s);
}

}  // namespace kzising
