#pragma once

// Scenario configuration for the command-line harness.
//
// The format is flat `key = value` text. Top-level keys come before any
// section header; every other key lives under one of
//
//   [pulsed] [continuous] [custom] [spinchain]   (must match `scenario`)
//   [numerics] [compare] [sweep]
//
// Lines whose first non-blank character is '#' are comments. Matrices are
// written row by row, rows separated by ';' and entries by blanks or ',';
// an entry may be complex, e.g. `1-2i`, `0.5i`, `-i`.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "../models.hpp"

namespace zeno::harness {

/// Invalid configuration; the message names the offending key.
class ConfigError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

enum class ScenarioKind { pulsed, continuous, custom, spinchain };

enum class Method { automatic, closed_form, quadrature };

inline std::string to_string(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::pulsed: return "pulsed";
    case ScenarioKind::continuous: return "continuous";
    case ScenarioKind::custom: return "custom";
    case ScenarioKind::spinchain: return "spinchain";
    }
    return "?";
}

inline std::string to_string(Method method) {
    switch (method) {
    case Method::automatic: return "auto";
    case Method::closed_form: return "closed_form";
    case Method::quadrature: return "quadrature";
    }
    return "?";
}

struct Sweep {
    std::string parameter;
    double start = 0.0;
    double stop = 0.0;
    std::size_t count = 0;
    bool log_spacing = false;
    std::vector<double> explicit_values;  ///< takes precedence over start/stop/count

    std::vector<double> values() const {
        if (!explicit_values.empty()) return explicit_values;
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) {
            const double u = static_cast<double>(i) / static_cast<double>(count - 1);
            out[i] = log_spacing ? std::exp(std::log(start) + u * (std::log(stop) - std::log(start)))
                                 : start + u * (stop - start);
        }
        out.back() = stop;
        return out;
    }
};

struct ScenarioConfig {
    ScenarioKind scenario = ScenarioKind::spinchain;
    std::string output = "-";
    Method method = Method::automatic;

    // pulsed / continuous / custom
    double K = 10.0;
    double tau = 1.0;
    std::optional<double> tau_F = 0.0;  ///< empty: tied to tau
    ComplexMatrix h0;
    ComplexMatrix hmeas;                ///< projector for the pulsed scenario
    std::optional<ComplexMatrix> hmeas_final;  ///< custom only: linear ramp target
    std::size_t initial_state = 0;      ///< computational basis index

    // spinchain
    models::SpinChainSpec chain;

    std::size_t level_from = 0;
    std::size_t level_to = 0;

    // numerics
    std::size_t intervals = 256;
    double quad_tol = 1e-7;
    double closed_form_tol = 1e-10;
    double exact_tol = 1e-9;
    int max_doublings = 8;
    NumericPolicy policy;

    // compare
    double rel_bound = 0.1;
    double abs_floor = 1e-12;

    std::optional<Sweep> sweep;

    /// Name of the first CSV column: the swept parameter, or the scenario's
    /// primary parameter when nothing is swept.
    std::string primary_parameter() const {
        if (sweep) return sweep->parameter;
        return scenario == ScenarioKind::spinchain ? "h" : "K";
    }

    double parameter(std::string_view name) const;
    ScenarioConfig with_parameter(std::string_view name, double value) const;
};

namespace detail {

using zeno::detail::format_double;
using zeno::detail::parse_double;
using zeno::detail::trim;

inline std::string format_shortest(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

inline bool parse_complex(std::string_view text, Complex& out) {
    text = trim(text);
    if (text.empty()) return false;
    if (text.back() != 'i') {
        double re = 0.0;
        if (!parse_double(text, re)) return false;
        out = {re, 0.0};
        return true;
    }
    std::string_view body = text.substr(0, text.size() - 1);
    // Split at the last sign that is not a leading sign or an exponent sign.
    std::size_t split = std::string_view::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    double re = 0.0;
    std::string_view imag_part = body;
    if (split != std::string_view::npos) {
        if (!parse_double(body.substr(0, split), re)) return false;
        imag_part = body.substr(split);
    }
    double im = 0.0;
    if (imag_part.empty() || imag_part == "+") im = 1.0;
    else if (imag_part == "-") im = -1.0;
    else if (!parse_double(imag_part, im)) return false;
    out = {re, im};
    return true;
}

inline std::string format_complex(Complex z) {
    if (z.imag() == 0.0) return format_shortest(z.real());
    std::string out;
    if (z.real() != 0.0) out = format_shortest(z.real());
    const std::string im = format_shortest(z.imag());
    if (!out.empty() && z.imag() > 0.0) out += '+';
    return out + im + 'i';
}

inline ComplexMatrix parse_matrix(std::string_view text, const std::string& key) {
    std::vector<std::vector<Complex>> rows;
    while (true) {
        const auto semi = text.find(';');
        std::string row(trim(text.substr(0, semi)));
        std::replace(row.begin(), row.end(), ',', ' ');
        std::istringstream tokens(row);
        std::vector<Complex> entries;
        for (std::string token; tokens >> token;) {
            Complex z;
            if (!parse_complex(token, z))
                throw ConfigError("key '" + key + "': cannot parse matrix entry '" + token + "'");
            entries.push_back(z);
        }
        if (!entries.empty()) rows.push_back(std::move(entries));
        if (semi == std::string_view::npos) break;
        text = text.substr(semi + 1);
    }
    if (rows.empty()) throw ConfigError("key '" + key + "': empty matrix");
    const std::size_t n = rows.size();
    ComplexMatrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        if (rows[i].size() != n) throw ConfigError("key '" + key + "': matrix must be square");
        for (std::size_t j = 0; j < n; ++j) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    return m;
}

inline std::string format_matrix(const ComplexMatrix& m) {
    std::string out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        if (i > 0) out += "; ";
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j > 0) out += ' ';
            out += format_complex(m(i, j));
        }
    }
    return out;
}

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry, std::less<>>;

struct RawConfig {
    std::map<std::string, Section, std::less<>> sections;  ///< "" holds the top-level keys
};

inline RawConfig parse_raw(std::string_view text) {
    RawConfig raw;
    raw.sections[""];
    std::string current;
    int line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        const std::string_view line = trim(text.substr(0, nl));
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (line.empty() || line.front() == '#') continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
            current = std::string(trim(line.substr(1, line.size() - 2)));
            if (raw.sections.count(current) && current.size())
                throw ConfigError("line " + std::to_string(line_no) + ": duplicate section [" + current + "]");
            raw.sections[current];
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
        auto& section = raw.sections[current];
        if (section.count(key))
            throw ConfigError("duplicate key '" + (current.empty() ? key : current + "." + key) + "' (line " +
                              std::to_string(line_no) + ")");
        section[key] = Entry{std::string(trim(line.substr(eq + 1))), line_no, false};
    }
    return raw;
}

/// Typed access to one section that records which keys were consumed.
class Reader {
public:
    Reader(Section* section, std::string name) : section_(section), name_(std::move(name)) {}

    std::string qualified(std::string_view key) const {
        return name_.empty() ? std::string(key) : name_ + "." + std::string(key);
    }

    const Entry* find(std::string_view key) {
        if (!section_) return nullptr;
        auto it = section_->find(key);
        if (it == section_->end()) return nullptr;
        it->second.used = true;
        return &it->second;
    }

    void real(std::string_view key, double& out) {
        if (const Entry* e = find(key)) {
            if (!parse_double(e->value, out) || !std::isfinite(out))
                throw ConfigError("key '" + qualified(key) + "': expected a finite number, got '" + e->value + "'");
        }
    }

    void positive(std::string_view key, double& out) {
        real(key, out);
        if (!(out > 0.0)) throw ConfigError("key '" + qualified(key) + "': must be positive");
    }

    template <class Int>
    void integer(std::string_view key, Int& out) {
        if (const Entry* e = find(key)) {
            const std::string_view v = trim(e->value);
            long long parsed = 0;
            auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), parsed);
            if (ec != std::errc{} || ptr != v.data() + v.size() || parsed < 0)
                throw ConfigError("key '" + qualified(key) + "': expected a non-negative integer, got '" +
                                  e->value + "'");
            out = static_cast<Int>(parsed);
        }
    }

    void matrix(std::string_view key, ComplexMatrix& out) {
        if (const Entry* e = find(key)) out = parse_matrix(e->value, qualified(key));
    }

    void text(std::string_view key, std::string& out) {
        if (const Entry* e = find(key)) out = e->value;
    }

    void reject_unused() const {
        if (!section_) return;
        for (const auto& [key, entry] : *section_)
            if (!entry.used)
                throw ConfigError("unknown key '" + qualified(key) + "' (line " + std::to_string(entry.line) + ")");
    }

private:
    Section* section_;
    std::string name_;
};

inline std::vector<std::string> sweepable(ScenarioKind kind) {
    switch (kind) {
    case ScenarioKind::pulsed: return {"K", "tau", "tau_F"};
    case ScenarioKind::continuous:
    case ScenarioKind::custom: return {"K", "tau"};
    case ScenarioKind::spinchain: return {"h", "T"};
    }
    return {};
}

inline ComplexMatrix default_measured_projector() {
    ComplexMatrix p = ComplexMatrix::Zero(4, 4);
    p(0, 0) = 1.0;
    return p;
}

} // namespace detail

inline double ScenarioConfig::parameter(std::string_view name) const {
    if (name == "K") return K;
    if (name == "tau") return tau;
    if (name == "tau_F") return tau_F.value_or(tau);
    if (name == "h") return chain.h;
    if (name == "T") return chain.T;
    throw ConfigError("unknown parameter '" + std::string(name) + "'");
}

inline ScenarioConfig ScenarioConfig::with_parameter(std::string_view name, double value) const {
    ScenarioConfig out = *this;
    if (name == "K") out.K = value;
    else if (name == "tau") out.tau = value;
    else if (name == "tau_F") out.tau_F = value;
    else if (name == "h") out.chain.h = value;
    else if (name == "T") out.chain.T = value;
    else throw ConfigError("unknown parameter '" + std::string(name) + "'");
    return out;
}

inline void validate(const ScenarioConfig& c) {
    const std::string s = to_string(c.scenario) + ".";
    if (c.scenario == ScenarioKind::spinchain) {
        try {
            c.chain.validate();
        } catch (const ValidationError& e) {
            throw ConfigError(std::string("section [spinchain]: ") + e.what());
        }
        if (c.level_from > static_cast<std::size_t>(c.chain.n_sites))
            throw ConfigError("key '" + s + "level_from' exceeds the number of levels");
        if (c.level_to > static_cast<std::size_t>(c.chain.n_sites))
            throw ConfigError("key '" + s + "level_to' exceeds the number of levels");
    } else {
        if (!(c.K > 0.0)) throw ConfigError("key '" + s + "K': must be positive");
        if (!(c.tau > 0.0)) throw ConfigError("key '" + s + "tau': must be positive");
        if (c.h0.rows() != c.hmeas.rows())
            throw ConfigError("key '" + s + "h0': dimension differs from the measurement matrix");
        if (c.hmeas_final && c.hmeas_final->rows() != c.hmeas.rows())
            throw ConfigError("key '" + s + "hmeas_final': dimension differs from hmeas");
        if (c.initial_state >= static_cast<std::size_t>(c.h0.rows()))
            throw ConfigError("key '" + s + "initial_state': basis index out of range");
        if (c.scenario == ScenarioKind::pulsed && c.tau_F && !(*c.tau_F >= 0.0 && *c.tau_F <= c.tau))
            throw ConfigError("key '" + s + "tau_F': need 0 <= tau_F <= tau");
    }
    if (c.level_from == c.level_to) throw ConfigError("key '" + s + "level_to': must differ from level_from");
    if (c.intervals < 2) throw ConfigError("key 'numerics.intervals': need at least 2");
    if (!(c.quad_tol > 0.0)) throw ConfigError("key 'numerics.quad_tol': must be positive");
    if (c.sweep) {
        const auto allowed = detail::sweepable(c.scenario);
        if (std::find(allowed.begin(), allowed.end(), c.sweep->parameter) == allowed.end())
            throw ConfigError("key 'sweep.parameter': '" + c.sweep->parameter + "' cannot be swept in scenario " +
                              to_string(c.scenario));
        if (c.sweep->explicit_values.empty()) {
            if (c.sweep->count < 2) throw ConfigError("key 'sweep.count': need at least 2 points");
            if (!(c.sweep->start < c.sweep->stop)) throw ConfigError("key 'sweep.stop': must exceed sweep.start");
            if (c.sweep->log_spacing && !(c.sweep->start > 0.0))
                throw ConfigError("key 'sweep.spacing': log spacing needs a positive start");
        }
    }
}

/// `base` is the tolerance bundle that numerics.policy entries modify.
inline ScenarioConfig parse_config(std::string_view text, const NumericPolicy& base = {}) {
    detail::RawConfig raw = detail::parse_raw(text);
    ScenarioConfig c;
    c.policy = base;

    detail::Reader top(&raw.sections[""], "");
    std::string scenario = "spinchain";
    top.text("scenario", scenario);
    if (scenario == "pulsed") c.scenario = ScenarioKind::pulsed;
    else if (scenario == "continuous") c.scenario = ScenarioKind::continuous;
    else if (scenario == "custom" || scenario == "custom-matrix") c.scenario = ScenarioKind::custom;
    else if (scenario == "spinchain") c.scenario = ScenarioKind::spinchain;
    else throw ConfigError("key 'scenario': unknown scenario '" + scenario + "'");
    top.text("output", c.output);
    top.reject_unused();

    const std::string name = to_string(c.scenario);
    for (const auto& [section, entries] : raw.sections) {
        if (section.empty() || section == name || section == "numerics" || section == "compare" ||
            section == "sweep")
            continue;
        if (section == "pulsed" || section == "continuous" || section == "custom" || section == "spinchain")
            throw ConfigError("section [" + section + "] does not match scenario '" + name + "'");
        throw ConfigError("unknown section [" + section + "]");
    }

    auto section_ptr = [&](const std::string& s) -> detail::Section* {
        auto it = raw.sections.find(s);
        return it == raw.sections.end() ? nullptr : &it->second;
    };

    detail::Reader model(section_ptr(name), name);
    std::string method = "auto";
    model.text("method", method);
    if (method == "auto") c.method = Method::automatic;
    else if (method == "closed_form") c.method = Method::closed_form;
    else if (method == "quadrature") c.method = Method::quadrature;
    else throw ConfigError("key '" + name + ".method': expected auto, closed_form or quadrature");

    if (c.scenario == ScenarioKind::spinchain) {
        model.positive("h", c.chain.h);
        model.positive("T", c.chain.T);
        model.integer("n_sites", c.chain.n_sites);
        if (const detail::Entry* e = model.find("lambdas")) {
            std::string values = e->value;
            std::replace(values.begin(), values.end(), ',', ' ');
            std::istringstream in(values);
            std::vector<double> parsed;
            for (std::string token; in >> token;) {
                double v = 0.0;
                if (!detail::parse_double(token, v))
                    throw ConfigError("key 'spinchain.lambdas': cannot parse '" + token + "'");
                parsed.push_back(v);
            }
            if (parsed.size() != 3) throw ConfigError("key 'spinchain.lambdas': expected three numbers");
            std::copy(parsed.begin(), parsed.end(), c.chain.lambdas.begin());
        }
        std::string boundary = "open";
        model.text("boundary", boundary);
        if (boundary == "open") c.chain.boundary = models::Boundary::open;
        else if (boundary == "periodic") c.chain.boundary = models::Boundary::periodic;
        else throw ConfigError("key 'spinchain.boundary': expected open or periodic");
        c.level_from = 0;
        c.level_to = static_cast<std::size_t>(std::max(c.chain.n_sites, 0));
    } else {
        model.positive("K", c.K);
        model.positive("tau", c.tau);
        c.h0 = models::two_qubit_h0().matrix();
        c.hmeas = detail::default_measured_projector();
        model.matrix("h0", c.h0);
        if (c.scenario == ScenarioKind::pulsed) {
            model.matrix("projector", c.hmeas);
            if (const detail::Entry* e = model.find("tau_F")) {
                if (detail::trim(e->value) == "tau") {
                    c.tau_F.reset();
                } else {
                    double v = 0.0;
                    if (!detail::parse_double(e->value, v))
                        throw ConfigError("key 'pulsed.tau_F': expected a number or 'tau'");
                    c.tau_F = v;
                }
            }
        } else {
            model.matrix("hmeas", c.hmeas);
        }
        if (c.scenario == ScenarioKind::custom) {
            ComplexMatrix final_matrix;
            model.matrix("hmeas_final", final_matrix);
            if (final_matrix.size() > 0) c.hmeas_final = final_matrix;
        }
        model.integer("initial_state", c.initial_state);
        c.level_from = 1;
        c.level_to = 0;
    }
    model.integer("level_from", c.level_from);
    model.integer("level_to", c.level_to);
    model.reject_unused();

    detail::Reader numerics(section_ptr("numerics"), "numerics");
    numerics.integer("intervals", c.intervals);
    numerics.positive("quad_tol", c.quad_tol);
    numerics.positive("closed_form_tol", c.closed_form_tol);
    numerics.positive("exact_tol", c.exact_tol);
    numerics.integer("max_doublings", c.max_doublings);
    if (const detail::Entry* e = numerics.find("policy")) {
        try {
            c.policy = NumericPolicy::from_string(e->value, base);
        } catch (const ValidationError& err) {
            throw ConfigError(std::string("key 'numerics.policy': ") + err.what());
        }
    }
    numerics.reject_unused();

    detail::Reader compare(section_ptr("compare"), "compare");
    compare.positive("rel_bound", c.rel_bound);
    compare.positive("abs_floor", c.abs_floor);
    compare.reject_unused();

    if (detail::Section* s = section_ptr("sweep")) {
        detail::Reader sweep(s, "sweep");
        Sweep sw;
        sweep.text("parameter", sw.parameter);
        if (sw.parameter.empty()) throw ConfigError("key 'sweep.parameter': required in [sweep]");
        if (const detail::Entry* e = sweep.find("values")) {
            std::string values = e->value;
            std::replace(values.begin(), values.end(), ',', ' ');
            std::istringstream in(values);
            for (std::string token; in >> token;) {
                double v = 0.0;
                if (!detail::parse_double(token, v) || !std::isfinite(v))
                    throw ConfigError("key 'sweep.values': cannot parse '" + token + "'");
                sw.explicit_values.push_back(v);
            }
            if (sw.explicit_values.empty()) throw ConfigError("key 'sweep.values': empty list");
        } else {
            for (const char* key : {"start", "stop", "count"})
                if (!s->count(key)) throw ConfigError(std::string("key 'sweep.") + key + "': required in [sweep]");
            sweep.real("start", sw.start);
            sweep.real("stop", sw.stop);
            sweep.integer("count", sw.count);
            std::string spacing = "linear";
            sweep.text("spacing", spacing);
            if (spacing == "log") sw.log_spacing = true;
            else if (spacing != "linear") throw ConfigError("key 'sweep.spacing': expected linear or log");
        }
        sweep.reject_unused();
        c.sweep = std::move(sw);
    }

    validate(c);
    return c;
}

/// Resolved configuration with every default written out; parse_config of
/// the result yields an equivalent configuration.
inline std::string to_text(const ScenarioConfig& c) {
    using detail::format_shortest;
    std::ostringstream out;
    const std::string name = to_string(c.scenario);
    out << "scenario = " << name << '\n';
    out << "output = " << c.output << '\n';
    out << '[' << name << "]\n";
    out << "method = " << to_string(c.method) << '\n';
    if (c.scenario == ScenarioKind::spinchain) {
        out << "h = " << format_shortest(c.chain.h) << '\n';
        out << "T = " << format_shortest(c.chain.T) << '\n';
        out << "n_sites = " << c.chain.n_sites << '\n';
        out << "lambdas = " << format_shortest(c.chain.lambdas[0]) << ", " << format_shortest(c.chain.lambdas[1])
            << ", " << format_shortest(c.chain.lambdas[2]) << '\n';
        out << "boundary = " << (c.chain.boundary == models::Boundary::open ? "open" : "periodic") << '\n';
    } else {
        out << "K = " << format_shortest(c.K) << '\n';
        out << "tau = " << format_shortest(c.tau) << '\n';
        if (c.scenario == ScenarioKind::pulsed)
            out << "tau_F = " << (c.tau_F ? format_shortest(*c.tau_F) : std::string("tau")) << '\n';
        out << "h0 = " << detail::format_matrix(c.h0) << '\n';
        out << (c.scenario == ScenarioKind::pulsed ? "projector = " : "hmeas = ") << detail::format_matrix(c.hmeas)
            << '\n';
        if (c.hmeas_final) out << "hmeas_final = " << detail::format_matrix(*c.hmeas_final) << '\n';
        out << "initial_state = " << c.initial_state << '\n';
    }
    out << "level_from = " << c.level_from << '\n';
    out << "level_to = " << c.level_to << '\n';
    out << "[numerics]\n";
    out << "intervals = " << c.intervals << '\n';
    out << "quad_tol = " << format_shortest(c.quad_tol) << '\n';
    out << "closed_form_tol = " << format_shortest(c.closed_form_tol) << '\n';
    out << "exact_tol = " << format_shortest(c.exact_tol) << '\n';
    out << "max_doublings = " << c.max_doublings << '\n';
    out << "policy = " << c.policy.to_string() << '\n';
    out << "[compare]\n";
    out << "rel_bound = " << format_shortest(c.rel_bound) << '\n';
    out << "abs_floor = " << format_shortest(c.abs_floor) << '\n';
    if (c.sweep) {
        out << "[sweep]\n";
        out << "parameter = " << c.sweep->parameter << '\n';
        if (!c.sweep->explicit_values.empty()) {
            out << "values = ";
            for (std::size_t i = 0; i < c.sweep->explicit_values.size(); ++i)
                out << (i ? ", " : "") << format_shortest(c.sweep->explicit_values[i]);
            out << '\n';
        } else {
            out << "start = " << format_shortest(c.sweep->start) << '\n';
            out << "stop = " << format_shortest(c.sweep->stop) << '\n';
            out << "count = " << c.sweep->count << '\n';
            out << "spacing = " << (c.sweep->log_spacing ? "log" : "linear") << '\n';
        }
    }
    return out.str();
}

inline bool operator==(const Sweep& a, const Sweep& b) {
    return a.parameter == b.parameter && a.explicit_values == b.explicit_values &&
           (!a.explicit_values.empty() ||
            (a.start == b.start && a.stop == b.stop && a.count == b.count && a.log_spacing == b.log_spacing));
}

inline bool operator==(const ScenarioConfig& a, const ScenarioConfig& b) {
    auto same_matrix = [](const ComplexMatrix& x, const ComplexMatrix& y) {
        return x.rows() == y.rows() && x.cols() == y.cols() && (x.size() == 0 || x == y);
    };
    const bool chain_scenario = a.scenario == ScenarioKind::spinchain;
    bool model_equal = true;
    if (chain_scenario) {
        model_equal = a.chain.h == b.chain.h && a.chain.T == b.chain.T && a.chain.n_sites == b.chain.n_sites &&
                      a.chain.lambdas == b.chain.lambdas && a.chain.boundary == b.chain.boundary;
    } else {
        model_equal = a.K == b.K && a.tau == b.tau && same_matrix(a.h0, b.h0) && same_matrix(a.hmeas, b.hmeas) &&
                      a.hmeas_final.has_value() == b.hmeas_final.has_value() &&
                      (!a.hmeas_final || same_matrix(*a.hmeas_final, *b.hmeas_final)) &&
                      a.initial_state == b.initial_state &&
                      (a.scenario != ScenarioKind::pulsed || a.tau_F == b.tau_F);
    }
    return a.scenario == b.scenario && a.output == b.output && a.method == b.method && model_equal &&
           a.level_from == b.level_from && a.level_to == b.level_to && a.intervals == b.intervals &&
           a.quad_tol == b.quad_tol && a.closed_form_tol == b.closed_form_tol && a.exact_tol == b.exact_tol &&
           a.max_doublings == b.max_doublings && a.policy == b.policy && a.rel_bound == b.rel_bound &&
           a.abs_floor == b.abs_floor && a.sweep == b.sweep;
}

/// Recovers the configuration echoed in the '#'-prefixed header of a CSV.
inline ScenarioConfig parse_config_from_csv_header(std::string_view csv) {
    std::string text;
    while (!csv.empty() && csv.front() == '#') {
        const auto nl = csv.find('\n');
        std::string_view line = csv.substr(1, nl == std::string_view::npos ? std::string_view::npos : nl - 1);
        if (!line.empty() && line.front() == ' ') line.remove_prefix(1);
        text.append(line).push_back('\n');
        csv = nl == std::string_view::npos ? std::string_view{} : csv.substr(nl + 1);
    }
    return parse_config(text);
}

} // namespace zeno::harness
