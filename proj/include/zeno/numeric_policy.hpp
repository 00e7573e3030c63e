#pragma once

#include <cstdlib>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>

#include "error.hpp"

namespace zeno {

/// Tolerance bundle shared by every validating constructor and algorithm.
///
/// Can be overridden from a `key=value;key=value` string (see from_string);
/// the CLI reads that string from the ZENO_NUM_POLICY environment variable.
struct NumericPolicy {
    double hermitian_tol = 1e-10;       ///< ||M - M^H||_max <= tol (1 + ||M||_max)
    double unitary_tol = 1e-8;          ///< ||U^H U - I||_max
    double projector_tol = 1e-10;       ///< P = P^H and P^2 = P
    double rank_tol = 1e-8;             ///< |tr P - rank|
    double density_trace_tol = 1e-10;
    double density_eig_tol = 1e-10;     ///< smallest admissible eigenvalue is -tol
    double completeness_tol = 1e-9;     ///< ||sum P_n - I||_max and ||P_n P_m||_max
    double degeneracy_rel_tol = 1e-8;   ///< relative to the spectral range
    double frame_tol = 1e-6;            ///< ||A P_n(0) A^H - P_n(t)||_max
    double subspace_tol = 1e-8;         ///< rho0 = P_n rho0 P_n
    double adiabatic_margin = 0.01;     ///< ratio <= margin * K^2
    double qze_margin = 10.0;           ///< nu >= margin * max(Gamma_R, |eps_n - eps_M|)
    double perturbative_limit = 0.5;    ///< W above this is flagged unreliable

    /// Applies the entries of `text` on top of `base`.
    static NumericPolicy from_string(std::string_view text, NumericPolicy base);
    static NumericPolicy from_string(std::string_view text) { return from_string(text, NumericPolicy{}); }
    static NumericPolicy from_env(const char* variable = "ZENO_NUM_POLICY");
    std::string to_string() const;

    bool operator==(const NumericPolicy&) const = default;
};

namespace detail {

template <class F>
void for_each_policy_field(NumericPolicy& p, F&& f) {
    f("hermitian_tol", p.hermitian_tol);
    f("unitary_tol", p.unitary_tol);
    f("projector_tol", p.projector_tol);
    f("rank_tol", p.rank_tol);
    f("density_trace_tol", p.density_trace_tol);
    f("density_eig_tol", p.density_eig_tol);
    f("completeness_tol", p.completeness_tol);
    f("degeneracy_rel_tol", p.degeneracy_rel_tol);
    f("frame_tol", p.frame_tol);
    f("subspace_tol", p.subspace_tol);
    f("adiabatic_margin", p.adiabatic_margin);
    f("qze_margin", p.qze_margin);
    f("perturbative_limit", p.perturbative_limit);
}

inline std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

inline bool parse_double(std::string_view text, double& out) {
    text = trim(text);
    if (text.empty()) return false;
    const char* begin = text.data();
    const char* end = text.data() + text.size();
    if (*begin == '+') ++begin;
    auto [ptr, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && ptr == end;
}

inline std::string format_double(double value) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
    if (ec != std::errc{}) return "nan";
    return std::string(buf, ptr);
}

} // namespace detail

inline NumericPolicy NumericPolicy::from_string(std::string_view text, NumericPolicy base) {
    NumericPolicy policy = base;
    while (!text.empty()) {
        const auto sep = text.find_first_of(";,");
        const auto item = detail::trim(text.substr(0, sep));
        text = sep == std::string_view::npos ? std::string_view{} : text.substr(sep + 1);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string_view::npos)
            throw ValidationError("numeric policy entry without '=': " + std::string(item));
        const auto key = detail::trim(item.substr(0, eq));
        const auto value = item.substr(eq + 1);
        bool found = false;
        detail::for_each_policy_field(policy, [&](std::string_view name, double& field) {
            if (name != key) return;
            found = true;
            double parsed = 0.0;
            if (!detail::parse_double(value, parsed) || !(parsed >= 0.0))
                throw ValidationError("numeric policy key '" + std::string(key) +
                                      "' needs a non-negative number");
            field = parsed;
        });
        if (!found) throw ValidationError("unknown numeric policy key: " + std::string(key));
    }
    return policy;
}

inline NumericPolicy NumericPolicy::from_env(const char* variable) {
    const char* raw = std::getenv(variable);
    return raw ? from_string(raw) : NumericPolicy{};
}

inline std::string NumericPolicy::to_string() const {
    NumericPolicy copy = *this;
    std::ostringstream out;
    bool first = true;
    detail::for_each_policy_field(copy, [&](std::string_view name, double& field) {
        if (!first) out << ';';
        first = false;
        char buf[32];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, field);
        out << name << '=' << (ec == std::errc{} ? std::string(buf, ptr) : detail::format_double(field));
    });
    return out.str();
}

} // namespace zeno
