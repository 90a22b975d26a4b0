#ifndef DARBOUX_IO_HPP
#define DARBOUX_IO_HPP

// Serialization conventions shared by the command-line tools: complex numbers
// are two-element arrays [re, im] in JSON and "re+imj" strings in CSV.

#include <cctype>
#include <cstdio>
#include <string>

#include <json.hpp>

#include "darboux/numeric.hpp"

namespace darboux {

inline std::string format_complex(cplx z, int precision = 16) {
    char buf[96];
    std::snprintf(buf, sizeof buf, "%.*g%+.*gj", precision, z.real(), precision, z.imag());
    return buf;
}

struct parse_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// accepts "1.25", "-0.3", "0.5j", "1.2+0.5j", "1e-3-2.5e-4j"
inline cplx parse_complex(const std::string &raw) {
    std::string s;
    for (char c : raw)
        if (!std::isspace(static_cast<unsigned char>(c))) s.push_back(c);
    if (s.empty()) throw parse_error("parse_complex: empty string");
    bool has_j = (s.back() == 'j' || s.back() == 'i');
    if (has_j) s.pop_back();
    if (s.empty()) throw parse_error("parse_complex: dangling imaginary unit");
    // split at the last top-level sign (not an exponent sign, not leading)
    std::size_t split = std::string::npos;
    for (std::size_t i = s.size(); i-- > 1;) {
        if ((s[i] == '+' || s[i] == '-') && s[i - 1] != 'e' && s[i - 1] != 'E') {
            split = i;
            break;
        }
    }
    auto to_double = [](const std::string &t) {
        if (t.empty() || t == "+" || t == "-") {
            if (t == "-") return -1.0;  // "-j"
            return 1.0;                 // "j", "+j"
        }
        std::size_t used = 0;
        double v = std::stod(t, &used);
        if (used != t.size()) throw parse_error("parse_complex: trailing characters in '" + t + "'");
        return v;
    };
    try {
        if (!has_j) {
            if (split != std::string::npos)
                throw parse_error("parse_complex: two components but no imaginary unit");
            return cplx(to_double(s), 0.0);
        }
        if (split == std::string::npos) return cplx(0.0, to_double(s));
        return cplx(to_double(s.substr(0, split)), to_double(s.substr(split)));
    } catch (const std::invalid_argument &) {
        throw parse_error("parse_complex: cannot parse '" + raw + "'");
    } catch (const std::out_of_range &) {
        throw parse_error("parse_complex: value out of range in '" + raw + "'");
    }
}

inline nlohmann::json json_complex(cplx z) { return nlohmann::json::array({z.real(), z.imag()}); }

inline cplx complex_from_json(const nlohmann::json &j) {
    if (j.is_number()) return cplx(j.get<double>(), 0.0);
    if (j.is_array() && j.size() == 2) return cplx(j[0].get<double>(), j[1].get<double>());
    if (j.is_string()) return parse_complex(j.get<std::string>());
    throw parse_error("complex_from_json: expected number, [re, im] or string");
}

}  // namespace darboux

#endif
