#ifndef GCDR_IO_HPP
#define GCDR_IO_HPP

#include "error.hpp"
#include "matrix.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

/**
 * @file io.hpp
 *
 * @brief CSV ingestion and lossless CSV persistence of datasets and embeddings.
 */

namespace gcdr {

struct LabeledDataset {
    DenseMatrix X;
    /// Dense label codes `0..C-1`, empty when the dataset is unlabeled.
    std::vector<int> labels;
    /// `categories[c]` is the original text of label code `c`.
    std::vector<std::string> categories;
    std::vector<std::string> feature_names;

    bool has_labels() const { return !labels.empty(); }
};

struct CsvOptions {
    char delimiter = ',';
    bool header = true;
    /// Column holding class labels: a header name, or a 0-based index.
    std::optional<std::string> label_column;
};

namespace detail {

inline std::vector<std::string> split_fields(const std::string& line, char delim) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == delim) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    for (auto& f : out) {
        const auto b = f.find_first_not_of(" \t");
        const auto e = f.find_last_not_of(" \t");
        f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
    }
    return out;
}

inline bool parse_double(const std::string& s, double& out) {
    if (s.empty()) {
        return false;
    }
    const char* begin = s.data();
    if (*begin == '+') {
        ++begin;
    }
    const auto res = std::from_chars(begin, s.data() + s.size(), out);
    return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

/// Shortest decimal text that reads back to exactly the same double.
inline std::string format_exact(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

} // namespace detail

/**
 * Read a numeric table. Row order is preserved; a label column, if requested,
 * is removed from the features and remapped to dense codes in order of first
 * appearance after sorting the distinct values (numerically when they all
 * parse as numbers).
 */
inline LabeledDataset load_csv(const std::string& path, const CsvOptions& opt = {}) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }

    std::vector<std::vector<std::string>> rows;
    std::vector<std::size_t> line_numbers;
    std::vector<std::string> header;
    std::string line;
    std::size_t lineno = 0;
    bool header_pending = opt.header;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.find_first_not_of(" \t") == std::string::npos) {
            continue;
        }
        auto fields = detail::split_fields(line, opt.delimiter);
        if (header_pending) {
            header = std::move(fields);
            header_pending = false;
            continue;
        }
        if (!rows.empty() && fields.size() != rows.front().size()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(rows.front().size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        if (rows.empty() && !header.empty() && fields.size() != header.size()) {
            throw ParseError(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(header.size()) +
                             " fields (header), found " + std::to_string(fields.size()));
        }
        rows.push_back(std::move(fields));
        line_numbers.push_back(lineno);
    }
    if (rows.empty()) {
        throw DataError("'" + path + "' contains no data rows");
    }

    const std::size_t width = rows.front().size();
    std::optional<std::size_t> label_idx;
    if (opt.label_column) {
        const std::string& want = *opt.label_column;
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (header[c] == want) {
                label_idx = c;
                break;
            }
        }
        if (!label_idx) {
            std::size_t pos = 0;
            try {
                const auto v = std::stoul(want, &pos);
                if (pos == want.size() && v < width) {
                    label_idx = v;
                }
            } catch (const std::logic_error&) {
            }
        }
        if (!label_idx) {
            throw ParameterError("label column '" + want + "' not found in '" + path + "'");
        }
    }

    LabeledDataset out;
    const std::size_t p = width - (label_idx ? 1 : 0);
    out.X = DenseMatrix(rows.size(), p);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (!label_idx || c != *label_idx) {
            out.feature_names.push_back(header[c]);
        }
    }

    std::vector<std::string> raw_labels;
    for (std::size_t r = 0; r < rows.size(); ++r) {
        std::size_t col = 0;
        for (std::size_t c = 0; c < width; ++c) {
            if (label_idx && c == *label_idx) {
                raw_labels.push_back(rows[r][c]);
                continue;
            }
            double v = 0;
            if (!detail::parse_double(rows[r][c], v)) {
                throw ParseError(path + ":" + std::to_string(line_numbers[r]) + ": row " + std::to_string(r) +
                                 ", column " + std::to_string(c) + ": '" + rows[r][c] + "' is not a number");
            }
            out.X(r, col++) = v;
        }
    }

    if (label_idx) {
        bool numeric = true;
        for (const auto& s : raw_labels) {
            double tmp;
            numeric = numeric && detail::parse_double(s, tmp);
        }
        std::vector<std::string> distinct = raw_labels;
        std::sort(distinct.begin(), distinct.end(), [&](const std::string& a, const std::string& b) {
            if (numeric) {
                double x, y;
                detail::parse_double(a, x);
                detail::parse_double(b, y);
                return x < y || (x == y && a < b);
            }
            return a < b;
        });
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        std::map<std::string, int> code;
        for (std::size_t c = 0; c < distinct.size(); ++c) {
            code[distinct[c]] = static_cast<int>(c);
        }
        out.categories = distinct;
        for (const auto& s : raw_labels) {
            out.labels.push_back(code[s]);
        }
    }
    return out;
}

/// Read a file written by `save_embedding`, taking a `label` column as labels when present.
inline LabeledDataset load_embedding(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open '" + path + "'");
    }
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') {
        first.pop_back();
    }
    const auto names = detail::split_fields(first, ',');
    CsvOptions opt;
    if (std::find(names.begin(), names.end(), "label") != names.end()) {
        opt.label_column = "label";
    }
    return load_csv(path, opt);
}

namespace detail {

inline void write_rows(std::ostream& os, const DenseMatrix& m, const std::vector<int>* labels,
                       const std::vector<std::string>* categories) {
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < m.cols(); ++j) {
            if (j) {
                os << ',';
            }
            os << format_exact(m(i, j));
        }
        if (labels) {
            const int code = (*labels)[i];
            os << ',';
            if (categories && code >= 0 && static_cast<std::size_t>(code) < categories->size()) {
                os << (*categories)[code];
            } else {
                os << code;
            }
        }
        os << '\n';
    }
}

inline void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) {
        throw DataError("failed writing '" + path + "'");
    }
}

} // namespace detail

/// Columns `z1..zq` (plus `label` with the original category text); values round-trip exactly.
inline void save_embedding(const std::string& path, const DenseMatrix& z, const std::vector<int>& labels = {},
                           const std::vector<std::string>& categories = {}) {
    if (!labels.empty() && labels.size() != z.rows()) {
        throw ContractViolation("save_embedding: label count does not match rows");
    }
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (std::size_t j = 0; j < z.cols(); ++j) {
        out << (j ? "," : "") << 'z' << (j + 1);
    }
    if (!labels.empty()) {
        out << ",label";
    }
    out << '\n';
    detail::write_rows(out, z, labels.empty() ? nullptr : &labels, categories.empty() ? nullptr : &categories);
    detail::finish(out, path);
}

inline void save_dataset(const std::string& path, const LabeledDataset& data) {
    std::ofstream out(path);
    if (!out) {
        throw DataError("cannot write '" + path + "'");
    }
    for (std::size_t j = 0; j < data.X.cols(); ++j) {
        out << (j ? "," : "");
        if (j < data.feature_names.size()) {
            out << data.feature_names[j];
        } else {
            out << 'x' << (j + 1);
        }
    }
    if (data.has_labels()) {
        out << ",label";
    }
    out << '\n';
    detail::write_rows(out, data.X, data.has_labels() ? &data.labels : nullptr,
                       data.categories.empty() ? nullptr : &data.categories);
    detail::finish(out, path);
}

} // namespace gcdr

#endif
