#include "svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "radarcast/error.hpp"

namespace radarcast::cli {

namespace {

constexpr double kWidth = 640;
constexpr double kHeight = 420;
constexpr double kLeft = 70;
constexpr double kRight = 20;
constexpr double kTop = 40;
constexpr double kBottom = 55;

const char* const kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

std::string escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '&': out += "&amp;"; break;
        default: out += c;
        }
    }
    return out;
}

std::string ramp(double t)
{
    t = std::clamp(t, 0.0, 1.0);
    const int r = static_cast<int>(255 * std::clamp(1.5 * t - 0.25, 0.0, 1.0));
    const int g = static_cast<int>(255 * std::clamp(1.0 - std::abs(2.0 * t - 1.0), 0.0, 1.0) * 0.9);
    const int b = static_cast<int>(255 * std::clamp(1.25 - 1.5 * t, 0.0, 1.0));
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

struct Axes {
    double x0, x1, y0, y1;
    bool log_x;

    double px(double x) const
    {
        const double a = log_x ? std::log10(x) : x;
        const double lo = log_x ? std::log10(x0) : x0;
        const double hi = log_x ? std::log10(x1) : x1;
        return kLeft + (a - lo) / (hi - lo) * (kWidth - kLeft - kRight);
    }
    double py(double y) const { return kHeight - kBottom - (y - y0) / (y1 - y0) * (kHeight - kTop - kBottom); }
};

void pad_range(double& lo, double& hi)
{
    if (!std::isfinite(lo) || !std::isfinite(hi)) {
        lo = 0.0;
        hi = 1.0;
    }
    if (hi - lo < 1e-12) {
        lo -= 0.5;
        hi += 0.5;
    }
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
}

void frame_open(std::ostringstream& s, const ChartOptions& o)
{
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\"" << kHeight
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(o.title)
      << "</text>\n"
      << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12 << "\" text-anchor=\"middle\">" << escape(o.x_label)
      << "</text>\n"
      << "<text x=\"16\" y=\"" << kHeight / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 " << kHeight / 2
      << ")\">" << escape(o.y_label) << "</text>\n";
}

void draw_axes(std::ostringstream& s, const Axes& a)
{
    s << "<rect x=\"" << kLeft << "\" y=\"" << kTop << "\" width=\"" << kWidth - kLeft - kRight << "\" height=\""
      << kHeight - kTop - kBottom << "\" fill=\"none\" stroke=\"#333\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double y = a.y0 + (a.y1 - a.y0) * i / 4.0;
        s << "<text x=\"" << kLeft - 6 << "\" y=\"" << a.py(y) + 4 << "\" text-anchor=\"end\">" << fmt(y) << "</text>\n";
        double x;
        if (a.log_x)
            x = std::pow(10.0, std::log10(a.x0) + (std::log10(a.x1) - std::log10(a.x0)) * i / 4.0);
        else
            x = a.x0 + (a.x1 - a.x0) * i / 4.0;
        s << "<text x=\"" << a.px(x) << "\" y=\"" << kHeight - kBottom + 16 << "\" text-anchor=\"middle\">" << fmt(x)
          << "</text>\n";
    }
}

void save(const std::filesystem::path& path, const std::ostringstream& s)
{
    if (path.has_parent_path())
        std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path);
    if (!out)
        throw IoError("cannot write " + path.string());
    out << s.str() << "</svg>\n";
}

}  // namespace

void write_line_chart(const std::filesystem::path& path, const std::vector<Series>& series, const ChartOptions& opts)
{
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& se : series)
        for (std::size_t i = 0; i < se.x.size(); ++i) {
            if (!std::isfinite(se.y[i]) || (opts.log_x && se.x[i] <= 0))
                continue;
            x0 = std::min(x0, se.x[i]);
            x1 = std::max(x1, se.x[i]);
            y0 = std::min(y0, se.y[i]);
            y1 = std::max(y1, se.y[i]);
        }
    if (!opts.log_x)
        pad_range(x0, x1);
    else if (!(x0 > 0 && x1 > x0)) {
        x0 = 1;
        x1 = 10;
    }
    pad_range(y0, y1);
    const Axes a{x0, x1, y0, y1, opts.log_x};

    std::ostringstream s;
    frame_open(s, opts);
    draw_axes(s, a);
    for (std::size_t k = 0; k < series.size(); ++k) {
        const auto& se = series[k];
        const char* color = kPalette[k % std::size(kPalette)];
        std::string d;
        bool pen = false;
        for (std::size_t i = 0; i < se.x.size(); ++i) {
            if (!std::isfinite(se.y[i]) || (opts.log_x && se.x[i] <= 0)) {
                pen = false;
                continue;
            }
            d += (pen ? " L" : " M") + fmt(a.px(se.x[i])) + " " + fmt(a.py(se.y[i]));
            pen = true;
            if (opts.markers)
                s << "<circle cx=\"" << a.px(se.x[i]) << "\" cy=\"" << a.py(se.y[i]) << "\" r=\"3\" fill=\"" << color
                  << "\"/>\n";
        }
        s << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"2\"/>\n";
        s << "<text x=\"" << kWidth - kRight - 8 << "\" y=\"" << kTop + 16 + 16 * k << "\" text-anchor=\"end\" fill=\""
          << color << "\">" << escape(se.label) << "</text>\n";
    }
    save(path, s);
}

void write_bar_chart(const std::filesystem::path& path, const std::vector<double>& values, const ChartOptions& opts,
                     double reference)
{
    double hi = reference;
    for (double v : values)
        hi = std::max(hi, v);
    if (!(hi > 0))
        hi = 1.0;
    const Axes a{0.0, static_cast<double>(std::max<std::size_t>(values.size(), 1)), 0.0, hi * 1.1, false};

    std::ostringstream s;
    frame_open(s, opts);
    draw_axes(s, a);
    for (std::size_t i = 0; i < values.size(); ++i) {
        const double xl = a.px(static_cast<double>(i) + 0.1);
        const double xr = a.px(static_cast<double>(i) + 0.9);
        s << "<rect x=\"" << xl << "\" y=\"" << a.py(values[i]) << "\" width=\"" << xr - xl << "\" height=\""
          << a.py(0.0) - a.py(values[i]) << "\" fill=\"" << kPalette[0] << "\"/>\n";
    }
    if (reference >= 0)
        s << "<line x1=\"" << a.px(0) << "\" x2=\"" << a.px(a.x1) << "\" y1=\"" << a.py(reference) << "\" y2=\""
          << a.py(reference) << "\" stroke=\"#d62728\" stroke-dasharray=\"6 4\"/>\n";
    save(path, s);
}

void write_scatter(const std::filesystem::path& path, const std::vector<double>& x, const std::vector<double>& y,
                   const std::vector<double>& color_value, double color_max, const ChartOptions& opts)
{
    double lim = 0.1;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (std::isfinite(x[i]) && std::isfinite(y[i]))
            lim = std::max({lim, std::abs(x[i]), std::abs(y[i])});
    lim *= 1.1;
    const Axes a{-lim, lim, -lim, lim, false};

    std::ostringstream s;
    frame_open(s, opts);
    draw_axes(s, a);
    s << "<line x1=\"" << a.px(0) << "\" x2=\"" << a.px(0) << "\" y1=\"" << a.py(-lim) << "\" y2=\"" << a.py(lim)
      << "\" stroke=\"#999\"/>\n"
      << "<line x1=\"" << a.px(-lim) << "\" x2=\"" << a.px(lim) << "\" y1=\"" << a.py(0) << "\" y2=\"" << a.py(0)
      << "\" stroke=\"#999\"/>\n";
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!std::isfinite(x[i]) || !std::isfinite(y[i]))
            continue;
        const double c = i < color_value.size() && std::isfinite(color_value[i]) ? color_value[i] / color_max : 0.0;
        s << "<circle cx=\"" << a.px(x[i]) << "\" cy=\"" << a.py(y[i]) << "\" r=\"4\" fill=\"" << ramp(c)
          << "\" fill-opacity=\"0.8\"/>\n";
    }
    save(path, s);
}

void write_frames(const std::filesystem::path& path, const std::vector<ReflectivityField>& frames,
                  const std::vector<std::string>& captions, double vmin, double vmax)
{
    if (frames.empty())
        throw InvalidArgument("no frames to plot");
    const int h = frames.front().height();
    const int w = frames.front().width();
    const double cell = std::max(1.0, 160.0 / std::max(h, w));
    const double fw = w * cell;
    const double fh = h * cell;
    const double gap = 10;
    const double total_w = frames.size() * (fw + gap) + gap;
    const double total_h = fh + 40;

    std::ostringstream s;
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << total_w << "\" height=\"" << total_h
      << "\" font-family=\"sans-serif\" font-size=\"11\" shape-rendering=\"crispEdges\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    for (std::size_t k = 0; k < frames.size(); ++k) {
        const auto& f = frames[k];
        require_same_shape(f, frames.front(), "write_frames");
        const double ox = gap + k * (fw + gap);
        s << "<g transform=\"translate(" << ox << ",10)\">\n";
        for (int r = 0; r < h; ++r)
            for (int c = 0; c < w; ++c) {
                const double v = f(r, c);
                if (v <= vmin)
                    continue;
                s << "<rect x=\"" << c * cell << "\" y=\"" << r * cell << "\" width=\"" << cell << "\" height=\"" << cell
                  << "\" fill=\"" << ramp((v - vmin) / (vmax - vmin)) << "\"/>";
            }
        s << "\n<rect width=\"" << fw << "\" height=\"" << fh << "\" fill=\"none\" stroke=\"#333\"/>\n";
        if (k < captions.size())
            s << "<text x=\"" << fw / 2 << "\" y=\"" << fh + 18 << "\" text-anchor=\"middle\">" << escape(captions[k])
              << "</text>\n";
        s << "</g>\n";
    }
    save(path, s);
}

}  // namespace radarcast::cli
