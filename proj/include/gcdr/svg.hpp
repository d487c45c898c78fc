#ifndef GCDR_SVG_HPP
#define GCDR_SVG_HPP

#include "error.hpp"
#include "matrix.hpp"

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

/**
 * @file svg.hpp
 *
 * @brief Deterministic SVG scatter plots of 2-D embeddings.
 */

namespace gcdr {

struct SvgOptions {
    double width = 800;
    double height = 800;
    double margin = 40;
    double radius = 2;
};

inline constexpr std::array<const char*, 12> svg_palette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78"};

/// Affine map from data coordinates to pixels: equal scale on both axes, bbox centered.
struct PixelMap {
    double scale = 1;
    double cx = 0, cy = 0;
    double px0 = 0, py0 = 0;

    double x(double v) const { return px0 + (v - cx) * scale; }
    double y(double v) const { return py0 - (v - cy) * scale; }
};

inline PixelMap fit_canvas(const DenseMatrix& z, const SvgOptions& opt) {
    PixelMap m;
    m.px0 = opt.width / 2;
    m.py0 = opt.height / 2;
    if (z.rows() == 0) {
        return m;
    }
    double xmin = z(0, 0), xmax = xmin, ymin = z(0, 1), ymax = ymin;
    for (std::size_t i = 1; i < z.rows(); ++i) {
        xmin = std::min(xmin, z(i, 0));
        xmax = std::max(xmax, z(i, 0));
        ymin = std::min(ymin, z(i, 1));
        ymax = std::max(ymax, z(i, 1));
    }
    m.cx = 0.5 * (xmin + xmax);
    m.cy = 0.5 * (ymin + ymax);
    const double inner_w = opt.width - 2 * opt.margin;
    const double inner_h = opt.height - 2 * opt.margin;
    const double span_x = xmax - xmin;
    const double span_y = ymax - ymin;
    if (span_x > 0 && span_y > 0) {
        m.scale = std::min(inner_w / span_x, inner_h / span_y);
    } else if (span_x > 0) {
        m.scale = inner_w / span_x;
    } else if (span_y > 0) {
        m.scale = inner_h / span_y;
    }
    return m;
}

namespace detail {
inline std::string fmt3(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    return buf;
}

inline std::string escape_xml(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&':
            out += "&amp;";
            break;
        case '<':
            out += "&lt;";
            break;
        case '>':
            out += "&gt;";
            break;
        case '"':
            out += "&quot;";
            break;
        default:
            out += c;
        }
    }
    return out;
}
} // namespace detail

/// SVG 1.1 document: one circle per point, plus a legend when labels are given.
inline std::string svg_scatter(const DenseMatrix& z, const std::vector<int>& labels = {},
                               const std::vector<std::string>& categories = {}, const SvgOptions& opt = {}) {
    if (z.cols() != 2) {
        throw ParameterError("scatter plots need a 2-D embedding, got " + std::to_string(z.cols()) + " columns");
    }
    if (!labels.empty() && labels.size() != z.rows()) {
        throw ContractViolation("svg_scatter: label count does not match rows");
    }
    const PixelMap map = fit_canvas(z, opt);
    std::string s;
    s += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" + detail::fmt3(opt.width) +
         "\" height=\"" + detail::fmt3(opt.height) + "\" viewBox=\"0 0 " + detail::fmt3(opt.width) + " " +
         detail::fmt3(opt.height) + "\">\n";
    s += "<rect x=\"0\" y=\"0\" width=\"" + detail::fmt3(opt.width) + "\" height=\"" + detail::fmt3(opt.height) +
         "\" fill=\"white\"/>\n";
    s += "<g id=\"points\">\n";
    for (std::size_t i = 0; i < z.rows(); ++i) {
        const int code = labels.empty() ? 0 : labels[i];
        const char* color = svg_palette[static_cast<std::size_t>(std::max(code, 0)) % svg_palette.size()];
        s += "<circle cx=\"" + detail::fmt3(map.x(z(i, 0))) + "\" cy=\"" + detail::fmt3(map.y(z(i, 1))) +
             "\" r=\"" + detail::fmt3(opt.radius) + "\" fill=\"" + color + "\"/>\n";
    }
    s += "</g>\n";

    if (!labels.empty()) {
        const int classes = *std::max_element(labels.begin(), labels.end()) + 1;
        s += "<g id=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
        for (int c = 0; c < classes; ++c) {
            const double y = opt.margin / 2 + 14.0 * c;
            const double x = opt.width - opt.margin - 80;
            const std::string name = static_cast<std::size_t>(c) < categories.size()
                                         ? categories[static_cast<std::size_t>(c)]
                                         : std::to_string(c);
            s += "<rect x=\"" + detail::fmt3(x) + "\" y=\"" + detail::fmt3(y) + "\" width=\"8\" height=\"8\" fill=\"" +
                 svg_palette[static_cast<std::size_t>(c) % svg_palette.size()] + "\"/>\n";
            s += "<text x=\"" + detail::fmt3(x + 12) + "\" y=\"" + detail::fmt3(y + 8) + "\">" +
                 detail::escape_xml(name) + "</text>\n";
        }
        s += "</g>\n";
    }
    s += "</svg>\n";
    return s;
}

inline void render_svg_scatter(const std::string& path, const DenseMatrix& z, const std::vector<int>& labels = {},
                               const std::vector<std::string>& categories = {}, const SvgOptions& opt = {}) {
    const std::string doc = svg_scatter(z, labels, categories, opt);
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    out << doc;
    out.flush();
    if (!out) {
        throw DataError("failed writing '" + path + "'");
    }
}

} // namespace gcdr

#endif
