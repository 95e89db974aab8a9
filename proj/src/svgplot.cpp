#include "jpais/svgplot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <stdexcept>

#include "jpais/harness.hpp"

namespace jpais::plot {

PlotKind kind_from_name(const std::string& name) {
    if (name == "ber_snr") return PlotKind::BerSnr;
    if (name == "ber_users") return PlotKind::BerUsers;
    if (name == "ber_fdt") return PlotKind::BerFdt;
    if (name == "nt_snr") return PlotKind::NtSnr;
    if (name == "mi_snr") return PlotKind::MiSnr;
    if (name == "ber_pe") return PlotKind::BerPe;
    if (name == "complexity") return PlotKind::Complexity;
    throw std::invalid_argument("unknown plot kind: " + name);
}

std::vector<std::string> kind_names() {
    return {"ber_snr", "ber_users", "ber_fdt", "nt_snr", "mi_snr", "ber_pe", "complexity"};
}

namespace {

struct Series {
    std::string label;
    std::vector<std::pair<double, double>> pts;
};

struct AxisSpec {
    std::string x_label, y_label, title;
    bool log_x = false, log_y = false;
};

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string render(const std::vector<Series>& series, const AxisSpec& ax) {
    if (series.empty()) throw std::runtime_error("plot: no series to draw");
    size_t total_pts = 0;
    for (const auto& s : series) total_pts += s.pts.size();
    if (total_pts == 0) throw std::runtime_error("plot: no data points");

    const double width = 640, height = 440;
    const double ml = 70, mr = 170, mt = 40, mb = 55;
    const double pw = width - ml - mr, ph = height - mt - mb;

    auto tx = [&](double v) { return ax.log_x ? std::log10(v) : v; };
    auto ty = [&](double v) { return ax.log_y ? std::log10(v) : v; };

    double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
    for (const auto& s : series)
        for (auto [x, y] : s.pts) {
            if (ax.log_x && x <= 0) continue;
            double yy = y;
            if (ax.log_y && yy <= 0) yy = 1e-7;  // clamp zero rates to the floor
            x0 = std::min(x0, tx(x));
            x1 = std::max(x1, tx(x));
            y0 = std::min(y0, ty(yy));
            y1 = std::max(y1, ty(yy));
        }
    if (!(x0 <= x1) || !(y0 <= y1)) throw std::runtime_error("plot: empty drawable range");
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    if (ax.log_y) {
        y0 = std::floor(y0);
        y1 = std::ceil(std::max(y1, y0 + 1.0));
    } else {
        const double pad = 0.05 * (y1 - y0 + 1e-12);
        y0 -= pad;
        y1 += pad;
        if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
    }

    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) {
        double yy = v;
        if (ax.log_y && yy <= 0) yy = 1e-7;
        return mt + ph - (ty(yy) - y0) / (y1 - y0) * ph;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + fmt(width) + "\" height=\"" +
           fmt(height) + "\" viewBox=\"0 0 " + fmt(width) + " " + fmt(height) + "\">\n";
    svg += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" +
           ax.title + "</text>\n";

    // Frame.
    svg += "<rect x=\"" + fmt(ml) + "\" y=\"" + fmt(mt) + "\" width=\"" + fmt(pw) + "\" height=\"" +
           fmt(ph) + "\" fill=\"none\" stroke=\"black\"/>\n";

    // Gridlines and ticks.
    if (ax.log_y) {
        for (double d = y0; d <= y1 + 1e-9; d += 1.0) {
            const double y = mt + ph - (d - y0) / (y1 - y0) * ph;
            svg += "<line class=\"decade\" x1=\"" + fmt(ml) + "\" y1=\"" + fmt(y) + "\" x2=\"" +
                   fmt(ml + pw) + "\" y2=\"" + fmt(y) + "\" stroke=\"#cccccc\" stroke-width=\"0.6\"/>\n";
            svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) +
                   "\" text-anchor=\"end\" font-size=\"11\">1e" + fmt(d) + "</text>\n";
        }
    } else {
        for (int t = 0; t <= 5; ++t) {
            const double v = y0 + (y1 - y0) * t / 5.0;
            const double y = mt + ph - (v - y0) / (y1 - y0) * ph;
            svg += "<line x1=\"" + fmt(ml) + "\" y1=\"" + fmt(y) + "\" x2=\"" + fmt(ml + pw) +
                   "\" y2=\"" + fmt(y) + "\" stroke=\"#dddddd\" stroke-width=\"0.6\"/>\n";
            svg += "<text x=\"" + fmt(ml - 8) + "\" y=\"" + fmt(y + 4) +
                   "\" text-anchor=\"end\" font-size=\"11\">" + fmt(v) + "</text>\n";
        }
    }
    for (int t = 0; t <= 6; ++t) {
        const double v = x0 + (x1 - x0) * t / 6.0;
        const double x = ml + (v - x0) / (x1 - x0) * pw;
        svg += "<line x1=\"" + fmt(x) + "\" y1=\"" + fmt(mt + ph) + "\" x2=\"" + fmt(x) +
               "\" y2=\"" + fmt(mt + ph + 5) + "\" stroke=\"black\"/>\n";
        const std::string label = ax.log_x ? ("1e" + fmt(v)) : fmt(v);
        svg += "<text x=\"" + fmt(x) + "\" y=\"" + fmt(mt + ph + 18) +
               "\" text-anchor=\"middle\" font-size=\"11\">" + label + "</text>\n";
    }
    svg += "<text x=\"" + fmt(ml + pw / 2) + "\" y=\"" + fmt(height - 12) +
           "\" text-anchor=\"middle\" font-size=\"13\">" + ax.x_label + "</text>\n";
    svg += "<text x=\"18\" y=\"" + fmt(mt + ph / 2) + "\" text-anchor=\"middle\" font-size=\"13\" " +
           "transform=\"rotate(-90 18 " + fmt(mt + ph / 2) + ")\">" + ax.y_label + "</text>\n";

    // Series.
    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 8];
        std::string poly;
        for (auto [x, y] : series[s].pts) {
            if (ax.log_x && x <= 0) continue;
            poly += fmt(px(x)) + "," + fmt(py(y)) + " ";
        }
        if (!poly.empty())
            svg += "<polyline points=\"" + poly + "\" fill=\"none\" stroke=\"" + color +
                   "\" stroke-width=\"1.6\"/>\n";
        for (auto [x, y] : series[s].pts) {
            if (ax.log_x && x <= 0) continue;
            svg += "<circle cx=\"" + fmt(px(x)) + "\" cy=\"" + fmt(py(y)) +
                   "\" r=\"3\" fill=\"" + std::string(color) + "\"/>\n";
        }
        const double ly = mt + 14 + 18.0 * double(s);
        svg += "<line x1=\"" + fmt(ml + pw + 10) + "\" y1=\"" + fmt(ly - 4) + "\" x2=\"" +
               fmt(ml + pw + 34) + "\" y2=\"" + fmt(ly - 4) + "\" stroke=\"" + color +
               "\" stroke-width=\"1.6\"/>\n";
        svg += "<text x=\"" + fmt(ml + pw + 40) + "\" y=\"" + fmt(ly) +
               "\" font-size=\"11\">" + series[s].label + "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace

std::string render_svg(const std::vector<metrics::RunMetrics>& rows, PlotKind kind) {
    if (rows.empty()) throw std::runtime_error("plot: no rows");
    AxisSpec ax;
    auto xval = [&](const metrics::RunMetrics& m) -> double {
        switch (kind) {
            case PlotKind::BerSnr:
            case PlotKind::NtSnr:
            case PlotKind::MiSnr: return m.snr_db;
            case PlotKind::BerUsers: return m.users;
            case PlotKind::BerFdt: return m.doppler;
            case PlotKind::BerPe: return m.feedback_error;
            case PlotKind::Complexity: return m.relays;
        }
        return 0;
    };
    auto yval = [&](const metrics::RunMetrics& m) -> double {
        switch (kind) {
            case PlotKind::NtSnr: return m.nt;
            case PlotKind::MiSnr: return m.mi;
            case PlotKind::Complexity: return m.mults;
            default: return m.ber;
        }
    };
    switch (kind) {
        case PlotKind::BerSnr: ax = {"SNR (dB)", "BER", "BER vs SNR", false, true}; break;
        case PlotKind::BerUsers: ax = {"users", "BER", "BER vs users", false, true}; break;
        case PlotKind::BerFdt: ax = {"fdT (cycles/symbol)", "BER", "BER vs fading rate", true, true}; break;
        case PlotKind::NtSnr: ax = {"SNR (dB)", "throughput (bits/slot)", "Normalized throughput", false, false}; break;
        case PlotKind::MiSnr: ax = {"SNR (dB)", "mutual information (bits/slot)", "Mutual information", false, false}; break;
        case PlotKind::BerPe: ax = {"feedback error probability", "BER", "BER vs feedback errors", true, true}; break;
        case PlotKind::Complexity: ax = {"relays", "multiplications/symbol", "Complexity", false, true}; break;
    }

    std::map<std::string, Series> grouped;
    for (const auto& m : rows) {
        std::string key = m.algorithm;
        if (kind != PlotKind::Complexity) key += " nr=" + std::to_string(m.relays);
        auto& s = grouped[key];
        s.label = key;
        s.pts.emplace_back(xval(m), yval(m));
    }
    std::vector<Series> series;
    for (auto& [k, s] : grouped) {
        std::sort(s.pts.begin(), s.pts.end());
        series.push_back(std::move(s));
    }
    return render(series, ax);
}

std::string emit_plot(const std::string& csv_path, PlotKind kind, const std::string& out_dir) {
    const auto rows = harness::read_csv(csv_path);
    const std::string svg = render_svg(rows, kind);
    std::string name;
    switch (kind) {
        case PlotKind::BerSnr: name = "ber_snr"; break;
        case PlotKind::BerUsers: name = "ber_users"; break;
        case PlotKind::BerFdt: name = "ber_fdt"; break;
        case PlotKind::NtSnr: name = "nt_snr"; break;
        case PlotKind::MiSnr: name = "mi_snr"; break;
        case PlotKind::BerPe: name = "ber_pe"; break;
        case PlotKind::Complexity: name = "complexity"; break;
    }
    const std::string path = out_dir + "/" + name + ".svg";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write: " + path);
    out << svg;
    return path;
}

}  // namespace jpais::plot
