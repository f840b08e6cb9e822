#include "priorlens/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "priorlens/store.hpp"

namespace priorlens {

namespace {

constexpr std::size_t kDensityPoints = 257;

std::string short_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

std::string params_label(const FitResult& r) {
    std::ostringstream os;
    os << family_name(r.family) << " (";
    if (const auto* pl = std::get_if<PowerLaw>(&r.params))
        os << "gamma=" << short_num(pl->gamma);
    else if (const auto* er = std::get_if<Erlang>(&r.params))
        os << "beta=" << short_num(er->beta);
    else if (const auto* g = std::get_if<Gaussian>(&r.params))
        os << "mu=" << short_num(g->mu) << ", sigma=" << short_num(g->sigma);
    os << ")";
    return os.str();
}

// Maps data coordinates into one plot panel.
struct Panel {
    double x0, y0, w, h;       // pixel box (y grows downward)
    double xmin, xmax, ymin, ymax;
    double px(double x) const { return x0 + (x - xmin) / (xmax - xmin) * w; }
    double py(double y) const { return y0 + h - (y - ymin) / (ymax - ymin) * h; }
};

void draw_axes(std::ostringstream& svg, const Panel& p, const std::string& xlabel,
               const std::string& ylabel, const std::string& title) {
    svg << "<rect x='" << p.x0 << "' y='" << p.y0 << "' width='" << p.w << "' height='"
        << p.h << "' fill='none' stroke='#444'/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double fx = p.xmin + (p.xmax - p.xmin) * i / 4.0;
        const double fy = p.ymin + (p.ymax - p.ymin) * i / 4.0;
        svg << "<line x1='" << p.px(fx) << "' y1='" << p.y0 + p.h << "' x2='" << p.px(fx)
            << "' y2='" << p.y0 + p.h + 4 << "' stroke='#444'/>\n"
            << "<text x='" << p.px(fx) << "' y='" << p.y0 + p.h + 16
            << "' font-size='10' text-anchor='middle'>" << short_num(fx) << "</text>\n";
        svg << "<line x1='" << p.x0 - 4 << "' y1='" << p.py(fy) << "' x2='" << p.x0
            << "' y2='" << p.py(fy) << "' stroke='#444'/>\n"
            << "<text x='" << p.x0 - 6 << "' y='" << p.py(fy) + 3
            << "' font-size='10' text-anchor='end'>" << short_num(fy) << "</text>\n";
    }
    svg << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 + p.h + 32
        << "' font-size='11' text-anchor='middle'>" << xlabel << "</text>\n";
    svg << "<text x='" << p.x0 - 44 << "' y='" << p.y0 + p.h / 2
        << "' font-size='11' text-anchor='middle' transform='rotate(-90 " << p.x0 - 44 << " "
        << p.y0 + p.h / 2 << ")'>" << ylabel << "</text>\n";
    svg << "<text x='" << p.x0 + p.w / 2 << "' y='" << p.y0 - 8
        << "' font-size='12' text-anchor='middle'>" << title << "</text>\n";
}

void draw_polyline(std::ostringstream& svg, const Panel& p, std::span<const double> xs,
                   std::span<const double> ys, const std::string& color, bool dashed) {
    svg << "<polyline fill='none' stroke='" << color << "' stroke-width='1.5'";
    if (dashed) svg << " stroke-dasharray='5,4'";
    svg << " points='";
    for (std::size_t i = 0; i < xs.size(); ++i)
        svg << p.px(xs[i]) << "," << p.py(ys[i]) << " ";
    svg << "'/>\n";
}

} // namespace

ReportBundle build_report(std::span<const PredictionPair> pairs,
                          std::span<const FitResult> ranked, const QuadratureConfig& cfg,
                          std::string scenario_id) {
    if (pairs.empty()) throw EmptyDataError("report needs at least one pair");
    if (ranked.empty()) throw EmptyDataError("report needs at least one fit result");

    ReportBundle rep;
    rep.scenario_id = std::move(scenario_id);
    rep.winner = ranked.front();
    rep.t.reserve(pairs.size());
    rep.observed.reserve(pairs.size());
    for (const auto& p : pairs) {
        rep.t.push_back(p.t);
        rep.observed.push_back(p.t_star);
    }

    double max_fitted = 0.0;
    for (const auto& fit : ranked) {
        const auto curve = prediction_curve(fit.params, rep.t, cfg);
        std::vector<double> values(curve.size());
        for (std::size_t i = 0; i < curve.size(); ++i) {
            values[i] = curve[i].t_star;
            max_fitted = std::max(max_fitted, values[i]);
        }
        rep.fitted.emplace_back(fit.family, std::move(values));
    }

    const double lo = *std::min_element(rep.t.begin(), rep.t.end());
    const double hi = std::max(1.5 * max_fitted, lo * (1.0 + 1e-9));
    rep.prior_x.resize(kDensityPoints);
    rep.prior_density_values.resize(kDensityPoints);
    const double step = (hi - lo) / static_cast<double>(kDensityPoints - 1);
    for (std::size_t i = 0; i < kDensityPoints; ++i) {
        rep.prior_x[i] = lo + step * static_cast<double>(i);
        rep.prior_density_values[i] = prior_density(rep.winner.params, rep.prior_x[i]);
    }
    double mass = 0.0;
    for (std::size_t i = 1; i < kDensityPoints; ++i)
        mass += 0.5 * (rep.prior_density_values[i - 1] + rep.prior_density_values[i]) * step;
    if (mass > 0.0)
        for (double& d : rep.prior_density_values) d /= mass;
    return rep;
}

void write_report_csv(const ReportBundle& report, const std::filesystem::path& curve_csv,
                      const std::filesystem::path& prior_csv) {
    std::string curve = "t,observed";
    for (const auto& [family, values] : report.fitted)
        curve += "," + std::string(family_name(family));
    curve += '\n';
    for (std::size_t i = 0; i < report.t.size(); ++i) {
        curve += format_double(report.t[i]);
        curve += ',';
        curve += format_double(report.observed[i]);
        for (const auto& [family, values] : report.fitted) {
            curve += ',';
            curve += format_double(values[i]);
        }
        curve += '\n';
    }

    std::string prior = "x,density\n";
    for (std::size_t i = 0; i < report.prior_x.size(); ++i) {
        prior += format_double(report.prior_x[i]);
        prior += ',';
        prior += format_double(report.prior_density_values[i]);
        prior += '\n';
    }

    std::ofstream c(curve_csv, std::ios::binary | std::ios::trunc);
    if (!c) throw IoError("cannot write " + curve_csv.string());
    c << curve;
    std::ofstream p(prior_csv, std::ios::binary | std::ios::trunc);
    if (!p) throw IoError("cannot write " + prior_csv.string());
    p << prior;
}

void write_report_svg(const ReportBundle& report, const std::filesystem::path& svg_path) {
    static const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c"};

    double ymax = *std::max_element(report.observed.begin(), report.observed.end());
    for (const auto& [family, values] : report.fitted)
        ymax = std::max(ymax, *std::max_element(values.begin(), values.end()));
    const double xmin = report.t.front();
    const double xmax = report.t.back();

    Panel left{60, 40, 360, 280, xmin, xmax, 0.0, ymax * 1.05};
    Panel right{540, 40, 360, 280, report.prior_x.front(), report.prior_x.back(), 0.0,
                *std::max_element(report.prior_density_values.begin(),
                                  report.prior_density_values.end()) *
                    1.05};
    if (right.ymax <= 0.0) right.ymax = 1.0;

    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='960' height='400' "
           "font-family='sans-serif'>\n";
    svg << "<text x='480' y='20' font-size='14' text-anchor='middle'>" << report.scenario_id
        << ": best fit " << params_label(report.winner) << "</text>\n";

    draw_axes(svg, left, "t", "predicted total", "predictions");
    for (std::size_t k = 0; k < report.fitted.size(); ++k) {
        const bool is_winner = report.fitted[k].first == report.winner.family;
        draw_polyline(svg, left, report.t, report.fitted[k].second,
                      kColors[k % 3], !is_winner);
    }
    for (std::size_t i = 0; i < report.t.size(); ++i)
        svg << "<circle cx='" << left.px(report.t[i]) << "' cy='"
            << left.py(report.observed[i]) << "' r='2.5' fill='#333'/>\n";
    for (std::size_t k = 0; k < report.fitted.size(); ++k)
        svg << "<text x='" << left.x0 + 8 << "' y='" << left.y0 + 14 + 14 * k
            << "' font-size='10' fill='" << kColors[k % 3] << "'>"
            << family_name(report.fitted[k].first) << "</text>\n";

    draw_axes(svg, right, "t_total", "density", "recovered prior");
    draw_polyline(svg, right, report.prior_x, report.prior_density_values, "#1f77b4", false);

    svg << "</svg>\n";

    std::ofstream out(svg_path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + svg_path.string());
    out << svg.str();
}

} // namespace priorlens
