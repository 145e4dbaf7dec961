// Copyright 2026 The qcorr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <stdexcept>

#include "qcorr/harness.hpp"

namespace qcorr {

namespace {

std::string fixed6(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) {
        return s;
    }
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string gamma_tag(double g) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", g);
    return buf;
}

struct Series {
    std::string name;
    std::vector<std::pair<double, double>> points;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::vector<Series> series;
};

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                    "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string render_svg(const Chart& chart) {
    constexpr double W = 640, H = 420, L = 70, R = 170, T = 40, B = 50;
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0;
    double y0 = x0, y1 = -x0;
    for (const Series& s : chart.series) {
        for (auto [x, y] : s.points) {
            x0 = std::min(x0, x);
            x1 = std::max(x1, x);
            y0 = std::min(y0, y);
            y1 = std::max(y1, y);
        }
    }
    if (!std::isfinite(x0)) {
        x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    }
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-12) { y0 -= 0.05; y1 += 0.05; }
    const double pad = 0.05 * (y1 - y0);
    y0 = std::max(0.0, y0 - pad);
    y1 = std::min(1.0, y1 + pad);
    if (y1 <= y0) y1 = y0 + 1e-3;
    auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
    auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.2f", v);
        return std::string(buf);
    };
    auto tick = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.4g", v);
        return std::string(buf);
    };

    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
        << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    svg << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">"
        << xml_escape(chart.title) << "</text>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
        << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 5; ++i) {
        const double xv = x0 + (x1 - x0) * i / 5.0;
        const double yv = y0 + (y1 - y0) * i / 5.0;
        svg << "<text x=\"" << num(sx(xv)) << "\" y=\"" << H - B + 16
            << "\" text-anchor=\"middle\">" << tick(xv) << "</text>\n";
        svg << "<text x=\"" << L - 6 << "\" y=\"" << num(sy(yv) + 4)
            << "\" text-anchor=\"end\">" << tick(yv) << "</text>\n";
        svg << "<line x1=\"" << L << "\" y1=\"" << num(sy(yv)) << "\" x2=\"" << W - R
            << "\" y2=\"" << num(sy(yv)) << "\" stroke=\"#ddd\"/>\n";
    }
    svg << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">"
        << xml_escape(chart.x_label) << "</text>\n";
    svg << "<text transform=\"translate(16," << (T + H - B) / 2
        << ") rotate(-90)\" text-anchor=\"middle\">mean fidelity</text>\n";
    for (std::size_t i = 0; i < chart.series.size(); ++i) {
        const Series& s = chart.series[i];
        const char* color = kPalette[i % std::size(kPalette)];
        svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t p = 0; p < s.points.size(); ++p) {
            if (p > 0) svg << ' ';
            svg << num(sx(s.points[p].first)) << ',' << num(sy(s.points[p].second));
        }
        svg << "\"/>\n";
        const double ly = T + 14 + 18.0 * i;
        svg << "<line x1=\"" << W - R + 10 << "\" y1=\"" << ly - 4 << "\" x2=\"" << W - R + 30
            << "\" y2=\"" << ly - 4 << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        svg << "<text x=\"" << W - R + 35 << "\" y=\"" << ly << "\">" << xml_escape(s.name)
            << "</text>\n";
    }
    svg << "</svg>\n";
    return svg.str();
}

// Methods in first-appearance order.
std::vector<std::string> methods_of(const std::vector<ResultRow>& rows) {
    std::vector<std::string> out;
    for (const ResultRow& r : rows) {
        if (std::find(out.begin(), out.end(), r.method) == out.end()) {
            out.push_back(r.method);
        }
    }
    return out;
}

// k sweeps: x = k; a row with k = 0 is a constant baseline across the sweep.
Chart k_chart(const std::string& title, const std::vector<ResultRow>& rows) {
    Chart c{title, "k", {}};
    int k_lo = std::numeric_limits<int>::max(), k_hi = 0;
    for (const ResultRow& r : rows) {
        if (r.k_or_epoch > 0) {
            k_lo = std::min(k_lo, r.k_or_epoch);
            k_hi = std::max(k_hi, r.k_or_epoch);
        }
    }
    for (const std::string& m : methods_of(rows)) {
        Series s{m, {}};
        for (const ResultRow& r : rows) {
            if (r.method != m) continue;
            if (r.k_or_epoch == 0 && k_hi > 0) {
                s.points = {{double(k_lo), r.mean_fidelity}, {double(k_hi), r.mean_fidelity}};
            } else {
                s.points.emplace_back(r.k_or_epoch, r.mean_fidelity);
            }
        }
        c.series.push_back(std::move(s));
    }
    return c;
}

Chart gamma_chart(const std::string& title, const std::vector<ResultRow>& rows) {
    Chart c{title, "gamma", {}};
    for (const std::string& m : methods_of(rows)) {
        Series s{m, {}};
        for (const ResultRow& r : rows) {
            if (r.method == m) s.points.emplace_back(r.gamma, r.mean_fidelity);
        }
        c.series.push_back(std::move(s));
    }
    return c;
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out << text;
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

}  // namespace

std::string to_csv(const ResultTable& table) {
    std::string out = "experiment,method,gamma,k_or_epoch,mean_fidelity,std,count\n";
    for (const ResultRow& r : table.rows) {
        out += csv_field(r.experiment) + ',' + csv_field(r.method) + ',' + fixed6(r.gamma) + ',' +
               std::to_string(r.k_or_epoch) + ',' + fixed6(r.mean_fidelity) + ',' + fixed6(r.std) +
               ',' + std::to_string(r.count) + '\n';
    }
    out += "# spec_hash=" + table.spec_hash + "\n";
    return out;
}

std::vector<std::filesystem::path> emit_report(const std::vector<ResultTable>& tables,
                                               ReportFormat format,
                                               const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> written;
    for (const ResultTable& t : tables) {
        const std::string stem = t.experiment + "-" + t.spec_hash;
        const auto csv = dir / (stem + ".csv");
        write_file(csv, to_csv(t));
        written.push_back(csv);
        if (format != ReportFormat::CsvAndSvg) {
            continue;
        }
        std::vector<std::pair<std::filesystem::path, Chart>> charts;
        if (t.experiment == "cluster_sweep" || t.experiment == "knn_eval") {
            std::vector<double> gammas;
            for (const ResultRow& r : t.rows) {
                if (std::find(gammas.begin(), gammas.end(), r.gamma) == gammas.end()) {
                    gammas.push_back(r.gamma);
                }
            }
            for (double g : gammas) {
                std::vector<ResultRow> rows;
                std::copy_if(t.rows.begin(), t.rows.end(), std::back_inserter(rows),
                             [g](const ResultRow& r) { return r.gamma == g; });
                charts.emplace_back(dir / (stem + "-gamma_" + gamma_tag(g) + ".svg"),
                                    k_chart(t.experiment + ", gamma = " + gamma_tag(g), rows));
            }
        } else if (t.experiment == "sample_invariance") {
            charts.emplace_back(dir / (stem + ".svg"), k_chart(t.experiment, t.rows));
        } else {
            charts.emplace_back(dir / (stem + ".svg"), gamma_chart(t.experiment, t.rows));
        }
        for (const auto& [path, chart] : charts) {
            write_file(path, render_svg(chart));
            written.push_back(path);
        }
    }
    return written;
}

}  // namespace qcorr
