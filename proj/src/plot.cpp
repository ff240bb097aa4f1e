#include <algorithm>
#include <sstream>

#include "speechalign/eval.hpp"
#include "speechalign/text_io.hpp"

namespace speechalign {

namespace {

constexpr double kWidth = 720.0;
constexpr double kHeight = 420.0;
constexpr double kLeft = 60.0;
constexpr double kRight = 20.0;
constexpr double kTop = 20.0;
constexpr double kBottom = 50.0;

struct PlotArea {
    double x_max;
    double y_max;

    double x(double v) const { return kLeft + (kWidth - kLeft - kRight) * v / x_max; }
    double y(double v) const { return kHeight - kBottom - (kHeight - kTop - kBottom) * v / y_max; }
};

std::string num(double v) { return format_fixed(v, 2); }

void open_svg(std::ostringstream& s) {
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(kWidth) << "\" height=\"" << num(kHeight)
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

void axes(std::ostringstream& s, const PlotArea& f, const std::string& x_label, const std::string& y_label,
          int x_ticks, int y_ticks, int y_decimals) {
    s << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\"" << num(f.x(f.x_max)) << "\" y2=\""
      << num(f.y(0)) << "\" stroke=\"black\"/>\n";
    s << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(0)) << "\" x2=\"" << num(f.x(0)) << "\" y2=\""
      << num(f.y(f.y_max)) << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= x_ticks; ++i) {
        const double v = f.x_max * i / x_ticks;
        s << "<text x=\"" << num(f.x(v)) << "\" y=\"" << num(f.y(0) + 16) << "\" text-anchor=\"middle\">"
          << format_fixed(v, 0) << "</text>\n";
    }
    for (int i = 0; i <= y_ticks; ++i) {
        const double v = f.y_max * i / y_ticks;
        s << "<text x=\"" << num(f.x(0) - 6) << "\" y=\"" << num(f.y(v) + 4) << "\" text-anchor=\"end\">"
          << format_fixed(v, y_decimals) << "</text>\n";
    }
    s << "<text x=\"" << num((kLeft + kWidth - kRight) / 2) << "\" y=\"" << num(kHeight - 10)
      << "\" text-anchor=\"middle\">" << x_label << "</text>\n";
    s << "<text x=\"14\" y=\"" << num((kTop + kHeight - kBottom) / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
      << num((kTop + kHeight - kBottom) / 2) << ")\">" << y_label << "</text>\n";
}

}  // namespace

std::string render_curve_svg(const ErrorCurve& curve) {
    const double x_max = curve.margins_s.empty() ? 1.0 : std::max(1.0, curve.margins_s.back());
    const PlotArea f{x_max, 1.0};
    std::ostringstream s;
    open_svg(s);
    axes(s, f, "margin (s)", "fraction of words within margin", 10, 5, 1);
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"2\" points=\"";
    s << num(f.x(0)) << ',' << num(f.y(0));
    for (std::size_t i = 0; i < curve.margins_s.size(); ++i) {
        s << ' ' << num(f.x(curve.margins_s[i])) << ',' << num(f.y(curve.fraction_within[i]));
    }
    s << "\"/>\n</svg>\n";
    return s.str();
}

std::string render_trace_svg(std::span<const ErrorTracePoint> trace, std::span<const SilenceGap> gaps,
                             double mean_error_s) {
    double x_max = 1.0;
    double y_max = std::max(1.0, mean_error_s);
    for (const auto& p : trace) {
        x_max = std::max(x_max, p.audio_time_s);
        y_max = std::max(y_max, p.error_s);
    }
    for (const auto& g : gaps) x_max = std::max(x_max, g.start_s + g.duration_s);
    const PlotArea f{x_max, y_max * 1.05};
    std::ostringstream s;
    open_svg(s);
    for (const auto& g : gaps) {
        s << "<rect x=\"" << num(f.x(g.start_s)) << "\" y=\"" << num(f.y(f.y_max)) << "\" width=\""
          << num(f.x(g.start_s + g.duration_s) - f.x(g.start_s)) << "\" height=\"" << num(f.y(0) - f.y(f.y_max))
          << "\" fill=\"lightgray\"/>\n";
    }
    axes(s, f, "audio time (s)", "error (s)", 10, 5, 1);
    s << "<polyline fill=\"none\" stroke=\"steelblue\" stroke-width=\"1\" points=\"";
    for (std::size_t i = 0; i < trace.size(); ++i) {
        if (i > 0) s << ' ';
        s << num(f.x(trace[i].audio_time_s)) << ',' << num(f.y(trace[i].error_s));
    }
    s << "\"/>\n";
    s << "<line x1=\"" << num(f.x(0)) << "\" y1=\"" << num(f.y(mean_error_s)) << "\" x2=\"" << num(f.x(x_max))
      << "\" y2=\"" << num(f.y(mean_error_s)) << "\" stroke=\"firebrick\" stroke-dasharray=\"6 4\"/>\n";
    s << "</svg>\n";
    return s.str();
}

}  // namespace speechalign
