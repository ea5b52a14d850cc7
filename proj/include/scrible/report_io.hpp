#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "scrible/harness.hpp"

namespace scrible {

/// 17 significant digits, enough to round-trip any double.
inline std::string fmt17(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Shortest text that reads back as the same double.
inline std::string fmt_exact(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

inline std::string fmt_short(double v, int digits = 6)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

inline constexpr const char* kTraceHeader =
    "round,algorithm,epsilon,repetition,loss,cum_loss,lin_regret,step_norm,g_dual_norm";
inline constexpr const char* kSummaryHeader =
    "algorithm,epsilon,repetition,final_cum_loss,final_lin_regret,bound_thm1,bound_thm2,max_abs_f";
inline constexpr const char* kSweepHeader = "algorithm,epsilon,mean_cum_loss,std_cum_loss,mean_lin_regret";

inline void write_trace_csv(std::ostream& os, std::span<const GridCell> cells)
{
    os << kTraceHeader << '\n';
    for (const GridCell& c : cells) {
        const std::string prefix = std::string(algorithm_name(c.algorithm)) + ',' + fmt17(c.epsilon) + ','
                                 + std::to_string(c.repetition) + ',';
        for (std::size_t t = 0; t < c.report.trace.size(); ++t) {
            const TraceRow& r = c.report.trace[t];
            os << (t + 1) << ',' << prefix << fmt17(r.loss) << ',' << fmt17(r.cum_loss) << ',' << fmt17(r.lin_regret)
               << ',' << fmt17(r.step_norm) << ',' << fmt17(r.g_dual_norm) << '\n';
        }
    }
}

inline void write_summary_csv(std::ostream& os, std::span<const GridCell> cells)
{
    os << kSummaryHeader << '\n';
    for (const GridCell& c : cells) {
        const RegretReport& r = c.report;
        os << algorithm_name(c.algorithm) << ',' << fmt17(c.epsilon) << ',' << c.repetition << ',' << fmt17(r.cum_loss)
           << ',' << fmt17(r.lin_regret) << ',' << fmt17(r.bound_thm1) << ',' << fmt17(r.bound_thm2) << ','
           << fmt17(r.max_abs_loss) << '\n';
    }
}

inline void write_sweep_csv(std::ostream& os, std::span<const SweepRow> rows)
{
    os << kSweepHeader << '\n';
    for (const SweepRow& r : rows)
        os << algorithm_name(r.algorithm) << ',' << fmt17(r.epsilon) << ',' << fmt17(r.mean_cum_loss) << ','
           << fmt17(r.std_cum_loss) << ',' << fmt17(r.mean_lin_regret) << '\n';
}

inline const char* algorithm_color(Algorithm a)
{
    switch (a) {
    case Algorithm::lifted: return "#1f77b4";
    case Algorithm::increasing_lr: return "#e6b800";
    case Algorithm::classic: return "#2ca02c";
    }
    return "#000000";
}

/// Line chart of mean cumulative loss against epsilon, one polyline per algorithm.
inline void write_sweep_svg(std::ostream& os, std::span<const SweepRow> rows, std::span<const Algorithm> algorithms)
{
    constexpr double W = 640, H = 420, left = 80, right = 150, top = 30, bottom = 60;
    const double pw = W - left - right, ph = H - top - bottom;

    double xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (!rows.empty()) {
        xmin = xmax = rows.front().epsilon;
        ymin = ymax = rows.front().mean_cum_loss;
        for (const SweepRow& r : rows) {
            xmin = std::min(xmin, r.epsilon);
            xmax = std::max(xmax, r.epsilon);
            ymin = std::min(ymin, r.mean_cum_loss);
            ymax = std::max(ymax, r.mean_cum_loss);
        }
    }
    if (xmax - xmin < 1e-12) {
        xmin -= 0.5;
        xmax += 0.5;
    }
    const double pad = std::max(1e-9, 0.08 * (ymax - ymin));
    ymin -= pad;
    ymax += pad;
    if (ymax - ymin < 1e-9) {
        ymin -= 1;
        ymax += 1;
    }
    auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
    auto sy = [&](double y) { return top + (ymax - y) / (ymax - ymin) * ph; };

    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" viewBox=\"0 0 " << W
       << ' ' << H << "\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
       << "  <g stroke=\"black\" stroke-width=\"1\">\n"
       << "    <line x1=\"" << left << "\" y1=\"" << top + ph << "\" x2=\"" << left + pw << "\" y2=\"" << top + ph
       << "\"/>\n"
       << "    <line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + ph << "\"/>\n"
       << "  </g>\n";

    os << "  <g font-family=\"sans-serif\" font-size=\"11\">\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        os << "    <line x1=\"" << fmt_short(sx(xv)) << "\" y1=\"" << top + ph << "\" x2=\"" << fmt_short(sx(xv))
           << "\" y2=\"" << top + ph + 5 << "\" stroke=\"black\"/>\n"
           << "    <text x=\"" << fmt_short(sx(xv)) << "\" y=\"" << top + ph + 18 << "\" text-anchor=\"middle\">"
           << fmt_short(xv, 3) << "</text>\n"
           << "    <line x1=\"" << left - 5 << "\" y1=\"" << fmt_short(sy(yv)) << "\" x2=\"" << left << "\" y2=\""
           << fmt_short(sy(yv)) << "\" stroke=\"black\"/>\n"
           << "    <text x=\"" << left - 8 << "\" y=\"" << fmt_short(sy(yv) + 4) << "\" text-anchor=\"end\">"
           << fmt_short(yv, 4) << "</text>\n";
    }
    os << "    <text x=\"" << left + pw / 2 << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">epsilon</text>\n"
       << "    <text x=\"20\" y=\"" << top + ph / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
       << top + ph / 2 << ")\">average cumulative loss</text>\n"
       << "  </g>\n";

    int slot = 0;
    for (Algorithm a : algorithms) {
        std::string points;
        for (const SweepRow& r : rows) {
            if (r.algorithm != a)
                continue;
            if (!points.empty())
                points += ' ';
            points += fmt_short(sx(r.epsilon)) + ',' + fmt_short(sy(r.mean_cum_loss));
        }
        const char* color = algorithm_color(a);
        os << "  <polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\" points=\"" << points << "\"/>\n";
        const double ly = top + 10 + 20 * slot++;
        os << "  <line x1=\"" << left + pw + 15 << "\" y1=\"" << ly << "\" x2=\"" << left + pw + 40 << "\" y2=\"" << ly
           << "\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n"
           << "  <text x=\"" << left + pw + 45 << "\" y=\"" << ly + 4
           << "\" font-family=\"sans-serif\" font-size=\"11\">" << algorithm_name(a) << "</text>\n";
    }
    os << "</svg>\n";
}

} // namespace scrible
