#pragma once

#include <cctype>
#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kshape/contour.hpp"
#include "kshape/errors.hpp"
#include "kshape/landmarks.hpp"
#include "kshape/loocv.hpp"
#include "kshape/roc.hpp"
#include "kshape/svm.hpp"

namespace kshape::io {

// Shortest decimal string that parses back to exactly the same double.
inline std::string format_double(double v) {
    char buf[40];
    for (const int prec : {15, 16, 17}) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        double back = 0.0;
        std::sscanf(buf, "%lf", &back);
        if (back == v || (v != v && back != back)) break;
    }
    return buf;
}

namespace detail {

inline std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text(const std::filesystem::path& path,
                       const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw io_error("cannot write " + path.string());
    out << text;
    if (!out) throw io_error("write failed for " + path.string());
}

inline std::string trim(std::string s) {
    while (!s.empty() && (s.back() == '\r' || s.back() == '\n' ||
                          s.back() == ' ' || s.back() == '\t'))
        s.pop_back();
    std::size_t b = 0;
    while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
    return s.substr(b);
}

inline std::vector<std::string> split(const std::string& line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : line) {
        if (ch == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    out.push_back(trim(cur));
    return out;
}

inline double parse_double(const std::string& s,
                           const std::string& context) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw io_error("trailing characters after number '" + s +
                           "' in " + context);
        return v;
    } catch (const io_error&) {
        throw;
    } catch (const std::exception&) {
        throw io_error("cannot parse '" + s + "' as a number in " + context);
    }
}

inline long parse_int(const std::string& s, const std::string& context) {
    long v = 0;
    const auto [p, ec] =
        std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw io_error("cannot parse '" + s + "' as an integer in " +
                       context);
    return v;
}

// Split into non-empty trimmed lines.
inline std::vector<std::string> lines_of(const std::string& text) {
    std::vector<std::string> out;
    std::string cur;
    for (const char ch : text) {
        if (ch == '\n') {
            cur = trim(cur);
            if (!cur.empty()) out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    cur = trim(cur);
    if (!cur.empty()) out.push_back(cur);
    return out;
}

} // namespace detail

// ---- landmark CSV: header "axial,lateral", one landmark per row ----

inline void write_landmarks_csv(const std::filesystem::path& path,
                                const landmark_set& lm) {
    std::string text = "axial,lateral\n";
    for (const cpx& p : lm.points) {
        text += format_double(p.real());
        text += ',';
        text += format_double(p.imag());
        text += '\n';
    }
    detail::write_text(path, text);
}

inline landmark_set read_landmarks_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines =
        detail::lines_of(detail::read_text(path));
    if (lines.empty() || detail::split(lines[0], ',') !=
                             std::vector<std::string>{"axial", "lateral"})
        throw io_error(path.string() +
                       ": expected header 'axial,lateral'");
    landmark_set lm;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::vector<std::string> cells = detail::split(lines[k], ',');
        if (cells.size() != 2)
            throw io_error(path.string() + ": line " + std::to_string(k + 1) +
                           " has " + std::to_string(cells.size()) +
                           " fields, expected 2");
        const std::string ctx = path.string() + " line " +
                                std::to_string(k + 1);
        lm.points.emplace_back(detail::parse_double(cells[0], ctx),
                               detail::parse_double(cells[1], ctx));
    }
    validate(lm);
    return lm;
}

// ---- masks: PGM (P2/P5) or CSV of integers; nonzero = foreground ----

namespace detail {

inline binary_mask read_pgm(const std::string& text,
                            const std::string& name) {
    std::size_t pos = 0;
    const auto skip_space = [&] {
        while (pos < text.size()) {
            if (text[pos] == '#') {
                while (pos < text.size() && text[pos] != '\n') ++pos;
            } else if (std::isspace(static_cast<unsigned char>(text[pos]))) {
                ++pos;
            } else {
                break;
            }
        }
    };
    const auto next_int = [&]() -> long {
        skip_space();
        std::size_t start = pos;
        while (pos < text.size() &&
               !std::isspace(static_cast<unsigned char>(text[pos])) &&
               text[pos] != '#')
            ++pos;
        if (start == pos) throw io_error(name + ": truncated PGM header");
        return parse_int(text.substr(start, pos - start), name);
    };

    if (text.size() < 2 || text[0] != 'P' ||
        (text[1] != '2' && text[1] != '5'))
        throw io_error(name + ": not a P2/P5 PGM file");
    const bool binary = text[1] == '5';
    pos = 2;
    const long w = next_int();
    const long h = next_int();
    const long maxval = next_int();
    if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535)
        throw io_error(name + ": bad PGM dimensions or maxval");

    binary_mask mask{static_cast<int>(w), static_cast<int>(h),
                     std::vector<std::uint8_t>(
                         static_cast<std::size_t>(w) * h, 0)};
    const std::size_t n = mask.data.size();
    if (binary) {
        ++pos; // single whitespace byte after maxval
        const int bytes = maxval < 256 ? 1 : 2;
        if (text.size() - pos < n * bytes)
            throw io_error(name + ": truncated PGM pixel data");
        for (std::size_t k = 0; k < n; ++k) {
            long v = static_cast<unsigned char>(text[pos + k * bytes]);
            if (bytes == 2)
                v = (v << 8) |
                    static_cast<unsigned char>(text[pos + k * bytes + 1]);
            mask.data[k] = v > 0 ? 1 : 0;
        }
    } else {
        for (std::size_t k = 0; k < n; ++k)
            mask.data[k] = next_int() > 0 ? 1 : 0;
    }
    return mask;
}

inline binary_mask read_mask_csv(const std::string& text,
                                 const std::string& name) {
    const std::vector<std::string> rows = lines_of(text);
    if (rows.empty()) throw io_error(name + ": empty mask file");
    binary_mask mask;
    mask.height = static_cast<int>(rows.size());
    for (std::size_t y = 0; y < rows.size(); ++y) {
        const std::vector<std::string> cells = split(rows[y], ',');
        if (y == 0) {
            mask.width = static_cast<int>(cells.size());
        } else if (static_cast<int>(cells.size()) != mask.width) {
            throw io_error(name + ": row " + std::to_string(y + 1) + " has " +
                           std::to_string(cells.size()) +
                           " columns, expected " +
                           std::to_string(mask.width));
        }
        for (const std::string& cell : cells)
            mask.data.push_back(
                parse_int(cell, name + " row " + std::to_string(y + 1)) > 0
                    ? 1
                    : 0);
    }
    return mask;
}

} // namespace detail

inline binary_mask read_mask(const std::filesystem::path& path) {
    const std::string ext = path.extension().string();
    const std::string text = detail::read_text(path);
    if (ext == ".pgm") return detail::read_pgm(text, path.string());
    if (ext == ".csv") return detail::read_mask_csv(text, path.string());
    throw io_error(path.string() +
                   ": unsupported mask format (use .pgm or .csv)");
}

// ---- dataset manifest: header "id,label,file", label in {-1, +1} ----

struct manifest_entry {
    std::string id;
    int label = 0;
    std::string file; // as written in the manifest (usually relative)
};

inline void write_manifest(const std::filesystem::path& path,
                           const std::vector<manifest_entry>& entries) {
    std::string text = "id,label,file\n";
    for (const manifest_entry& e : entries)
        text += e.id + ',' + std::to_string(e.label) + ',' + e.file + '\n';
    detail::write_text(path, text);
}

inline std::vector<manifest_entry>
read_manifest(const std::filesystem::path& path) {
    const std::vector<std::string> lines =
        detail::lines_of(detail::read_text(path));
    if (lines.empty() ||
        detail::split(lines[0], ',') !=
            std::vector<std::string>{"id", "label", "file"})
        throw io_error(path.string() + ": expected header 'id,label,file'");
    std::vector<manifest_entry> out;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::vector<std::string> cells = detail::split(lines[k], ',');
        if (cells.size() != 3)
            throw io_error(path.string() + ": line " + std::to_string(k + 1) +
                           " has " + std::to_string(cells.size()) +
                           " fields, expected 3");
        const long label = detail::parse_int(
            cells[1], path.string() + " line " + std::to_string(k + 1));
        if (label != -1 && label != 1)
            throw io_error(path.string() + ": line " + std::to_string(k + 1) +
                           ": label must be -1 or +1, got " + cells[1]);
        out.push_back({cells[0], static_cast<int>(label), cells[2]});
    }
    return out;
}

// Manifest + referenced landmark CSVs (paths resolved against the
// manifest's directory) as one dataset.
inline shape_dataset load_dataset(const std::filesystem::path& manifest) {
    const std::vector<manifest_entry> entries = read_manifest(manifest);
    const std::filesystem::path base = manifest.parent_path();
    shape_dataset ds;
    for (const manifest_entry& e : entries) {
        std::filesystem::path f(e.file);
        if (f.is_relative()) f = base / f;
        ds.ids.push_back(e.id);
        ds.labels.push_back(e.label);
        ds.shapes.push_back(read_landmarks_csv(f));
    }
    validate(ds);
    return ds;
}

// ---- score tables: header "id,label,score" ----

inline void write_scores_csv(const std::filesystem::path& path,
                             const score_table& t) {
    validate(t);
    std::string text = "id,label,score\n";
    for (std::size_t k = 0; k < t.size(); ++k) {
        text += (t.ids.empty() ? std::to_string(k) : t.ids[k]) + ',' +
                std::to_string(t.labels[k]) + ',' +
                format_double(t.scores[k]) + '\n';
    }
    detail::write_text(path, text);
}

inline score_table read_scores_csv(const std::filesystem::path& path) {
    const std::vector<std::string> lines =
        detail::lines_of(detail::read_text(path));
    if (lines.empty() ||
        detail::split(lines[0], ',') !=
            std::vector<std::string>{"id", "label", "score"})
        throw io_error(path.string() + ": expected header 'id,label,score'");
    score_table t;
    for (std::size_t k = 1; k < lines.size(); ++k) {
        const std::vector<std::string> cells = detail::split(lines[k], ',');
        if (cells.size() != 3)
            throw io_error(path.string() + ": line " + std::to_string(k + 1) +
                           " has " + std::to_string(cells.size()) +
                           " fields, expected 3");
        const std::string ctx = path.string() + " line " +
                                std::to_string(k + 1);
        const long label = detail::parse_int(cells[1], ctx);
        if (label != -1 && label != 1)
            throw io_error(ctx + ": label must be -1 or +1, got " + cells[1]);
        t.ids.push_back(cells[0]);
        t.labels.push_back(static_cast<int>(label));
        t.scores.push_back(detail::parse_double(cells[2], ctx));
    }
    validate(t);
    return t;
}

// ---- ROC curve / model JSON ----

inline nlohmann::json roc_to_json(const roc_result& r) {
    nlohmann::json j;
    j["auc"] = r.auc;
    j["n_pos"] = r.n_pos;
    j["n_neg"] = r.n_neg;
    j["cutoff"] = r.cutoff;
    j["accuracy"] = r.accuracy;
    j["sensitivity"] = r.sensitivity;
    j["specificity"] = r.specificity;
    nlohmann::json pts = nlohmann::json::array();
    for (const roc_point& p : r.points)
        pts.push_back({{"fpr", p.fpr},
                       {"tpr", p.tpr},
                       {"threshold", p.threshold}});
    j["points"] = std::move(pts);
    return j;
}

inline void write_roc_json(const std::filesystem::path& path,
                           const roc_result& r) {
    detail::write_text(path, roc_to_json(r).dump(2) + "\n");
}

// ROC vertices for external plotting.
inline void write_roc_points_csv(const std::filesystem::path& path,
                                 const roc_result& r) {
    std::string text = "fpr,tpr,threshold\n";
    for (const roc_point& p : r.points)
        text += format_double(p.fpr) + ',' + format_double(p.tpr) + ',' +
                format_double(p.threshold) + '\n';
    detail::write_text(path, text);
}

inline void save_model_json(const std::filesystem::path& path,
                            const svm_model& m) {
    nlohmann::json j;
    j["sigma"] = m.sigma;
    j["C"] = m.C;
    j["bias"] = m.bias;
    j["metric"] =
        m.metric == shape_metric::cyclic ? "cyclic" : "indexed";
    j["coeffs"] = m.coeffs;
    nlohmann::json sv = nlohmann::json::array();
    for (const landmark_set& lm : m.support_landmarks) {
        nlohmann::json pts = nlohmann::json::array();
        for (const cpx& p : lm.points)
            pts.push_back({p.real(), p.imag()});
        sv.push_back(std::move(pts));
    }
    j["support_landmarks"] = std::move(sv);
    detail::write_text(path, j.dump(2) + "\n");
}

inline svm_model load_model_json(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(detail::read_text(path));
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
    svm_model m;
    try {
        m.sigma = j.at("sigma").get<double>();
        m.C = j.at("C").get<double>();
        m.bias = j.at("bias").get<double>();
        const std::string metric = j.value("metric", "indexed");
        if (metric == "cyclic")
            m.metric = shape_metric::cyclic;
        else if (metric == "indexed")
            m.metric = shape_metric::indexed;
        else
            throw io_error(path.string() + ": unknown metric '" + metric +
                           "'");
        m.coeffs = j.at("coeffs").get<std::vector<double>>();
        for (const nlohmann::json& pts : j.at("support_landmarks")) {
            landmark_set lm;
            for (const nlohmann::json& p : pts)
                lm.points.emplace_back(p.at(0).get<double>(),
                                       p.at(1).get<double>());
            m.support_landmarks.push_back(std::move(lm));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(path.string() + ": " + e.what());
    }
    if (m.coeffs.size() != m.support_landmarks.size())
        throw io_error(path.string() + ": " +
                       std::to_string(m.coeffs.size()) + " coeffs for " +
                       std::to_string(m.support_landmarks.size()) +
                       " support landmark sets");
    if (!(m.sigma > 0.0))
        throw io_error(path.string() + ": sigma must be > 0");
    for (const landmark_set& lm : m.support_landmarks)
        m.support_shapes.push_back(to_pre_shape(lm));
    return m;
}

} // namespace kshape::io
