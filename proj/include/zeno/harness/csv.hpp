#pragma once

#include <sstream>
#include <string>

#include "scenario.hpp"

namespace zeno::harness {

namespace detail {

inline std::string csv_field(const Cell& cell) {
    if (const double* v = std::get_if<double>(&cell)) return zeno::detail::format_double(*v);
    const std::string& s = std::get<std::string>(cell);
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char ch : s) {
        if (ch == '"') quoted += '"';
        quoted += ch;
    }
    return quoted + '"';
}

} // namespace detail

/// CSV text: the resolved configuration as '# ' comment lines, the column
/// names, then one row per sweep point. Numbers carry 17 significant digits.
inline std::string to_csv(const ResultTable& table) {
    std::ostringstream out;
    std::istringstream echo(to_text(table.config));
    for (std::string line; std::getline(echo, line);) out << "# " << line << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i) out << (i ? "," : "") << table.columns[i];
    out << '\n';
    for (const auto& row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << detail::csv_field(row[i]);
        out << '\n';
    }
    return out.str();
}

/// gnuplot script plotting every probability column against the first one.
inline std::string plot_script(const ResultTable& table, const std::string& csv_path) {
    std::ostringstream out;
    out << "set datafile separator ','\n";
    out << "set datafile commentschars '#'\n";
    out << "set key autotitle columnhead\n";
    out << "set xlabel '" << table.columns.front() << "'\n";
    out << "set ylabel 'W'\n";
    out << "set grid\n";
    out << "plot '" << csv_path << "' using 1:2 with linespoints";
    if (table.columns.size() > 2 && table.columns[2] == "W_exact")
        out << ", '' using 1:3 with linespoints";
    out << '\n';
    return out.str();
}

} // namespace zeno::harness
