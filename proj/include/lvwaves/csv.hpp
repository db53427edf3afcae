#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "lvwaves/error.hpp"

namespace lvw::csv {

using Cells = std::variant<std::vector<double>, std::vector<std::string>>;

struct Column {
    std::string name;
    Cells cells;

    std::size_t size() const {
        return std::visit([](const auto& v) { return v.size(); }, cells);
    }
};

/// Column-oriented table; all columns must have equal length when written.
struct Table {
    std::vector<Column> columns;

    Table& add(std::string name, std::vector<double> values) {
        columns.push_back({std::move(name), std::move(values)});
        return *this;
    }
    Table& add(std::string name, std::vector<std::string> values) {
        columns.push_back({std::move(name), std::move(values)});
        return *this;
    }
    std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
};

/// 17 significant digits: round-trips every double.
inline std::string format_number(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

inline std::string quote(const std::string& s) {
    if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += '"';
        out += ch;
    }
    return out + "\"";
}

inline std::string to_string(const Table& t) {
    if (t.columns.empty()) throw PreconditionError("table has no columns");
    const std::size_t n = t.rows();
    for (const Column& c : t.columns) {
        if (c.name.empty()) throw PreconditionError("unnamed CSV column");
        if (c.size() != n) {
            throw PreconditionError("column '" + c.name + "' has " + std::to_string(c.size()) + " rows, expected " +
                                    std::to_string(n));
        }
    }
    std::string out;
    for (std::size_t j = 0; j < t.columns.size(); ++j) {
        if (j) out += ',';
        out += quote(t.columns[j].name);
    }
    out += '\n';
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < t.columns.size(); ++j) {
            if (j) out += ',';
            const Cells& cells = t.columns[j].cells;
            if (const auto* d = std::get_if<std::vector<double>>(&cells)) {
                out += format_number((*d)[i]);
            } else {
                out += quote(std::get<std::vector<std::string>>(cells)[i]);
            }
        }
        out += '\n';
    }
    return out;
}

inline void write_text(const std::string& text, const std::filesystem::path& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw Error("cannot open '" + path.string() + "' for writing");
    f << text;
    f.close();
    if (!f) throw Error("failed writing '" + path.string() + "'");
}

inline void write_csv(const Table& t, const std::filesystem::path& path) { write_text(to_string(t), path); }

}  // namespace lvw::csv
