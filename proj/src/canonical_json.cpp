#include "povqa/canonical_json.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "povqa/rng.hpp"

namespace povqa {

namespace {

void dump_number_float(std::string& out, double v) {
    if (!std::isfinite(v)) throw std::invalid_argument("canonical_dump: non-finite number");
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3f", v);
    std::string s(buf);
    if (s == "-0.000") s = "0.000";
    out += s;
}

void dump_value(std::string& out, const json& v) {
    switch (v.type()) {
        case json::value_t::object: {
            out += '{';
            bool first = true;
            for (auto it = v.cbegin(); it != v.cend(); ++it) {
                if (!first) out += ',';
                first = false;
                out += json(it.key()).dump();
                out += ':';
                dump_value(out, it.value());
            }
            out += '}';
            break;
        }
        case json::value_t::array: {
            out += '[';
            bool first = true;
            for (const auto& e : v) {
                if (!first) out += ',';
                first = false;
                dump_value(out, e);
            }
            out += ']';
            break;
        }
        case json::value_t::number_float:
            dump_number_float(out, v.get<double>());
            break;
        default:
            // strings, ints, bools, null: nlohmann's own dump is already canonical
            out += v.dump();
            break;
    }
}

}  // namespace

std::string canonical_dump(const json& v) {
    std::string out;
    dump_value(out, v);
    return out;
}

std::string canonical_line(const json& v) { return canonical_dump(v) + "\n"; }

std::string canonical_hash(const json& v) { return hex64(fnv1a64(canonical_dump(v))); }

}  // namespace povqa
