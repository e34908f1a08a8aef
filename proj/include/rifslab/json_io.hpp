#ifndef RIFSLAB_JSON_IO_HPP
#define RIFSLAB_JSON_IO_HPP

#include <string>

#include <json.hpp>

#include "rifslab/errors.hpp"
#include "rifslab/interval_union.hpp"
#include "rifslab/rifs.hpp"

namespace rifslab {

using nlohmann::json;

inline json rat_to_json(const Rat& r, ArithmeticMode mode) {
    if (mode == ArithmeticMode::rational) return rational_to_string(r);
    return to_double(r);
}

inline Rat rat_from_json(const json& j) {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rat(j.get<long long>());
    if (j.is_number()) return rat_from_double(j.get<double>());
    throw Error(ErrorCode::Validation, "expected a number or rational string");
}

inline json law_to_json(const PerturbationLaw& law, ArithmeticMode mode) {
    json j;
    j["center"] = rat_to_json(law.center, mode);
    j["half_width"] = rat_to_json(law.half_width, mode);
    switch (law.shape) {
        case LawShape::uniform: j["shape"] = "uniform"; break;
        case LawShape::triangular: j["shape"] = "triangular"; break;
        case LawShape::sampled: {
            json g = json::array();
            for (const auto& [o, d] : law.grid) g.push_back(json::array({o, d}));
            j["shape"] = json{{"sampled", g}};
            break;
        }
    }
    return j;
}

inline PerturbationLaw law_from_json(const json& j) {
    PerturbationLaw law;
    law.center = rat_from_json(j.at("center"));
    law.half_width = rat_from_json(j.at("half_width"));
    const json& s = j.at("shape");
    if (s.is_string()) {
        std::string name = s.get<std::string>();
        if (name == "uniform")
            law.shape = LawShape::uniform;
        else if (name == "triangular")
            law.shape = LawShape::triangular;
        else
            throw Error(ErrorCode::Validation, "unknown law shape: " + name);
    } else if (s.is_object() && s.contains("sampled")) {
        law.shape = LawShape::sampled;
        for (const auto& pair : s.at("sampled"))
            law.grid.push_back({pair.at(0).get<double>(), pair.at(1).get<double>()});
    } else {
        throw Error(ErrorCode::Validation, "malformed law shape");
    }
    return law;
}

inline json spec_to_json(const RIFSSpec& spec) {
    json j;
    j["ratios"] = json::array();
    for (const auto& r : spec.ratios) j["ratios"].push_back(rat_to_json(r, spec.mode));
    j["laws"] = json::array();
    for (const auto& law : spec.laws) j["laws"].push_back(law_to_json(law, spec.mode));
    j["mode"] = spec.mode == ArithmeticMode::rational ? "rational" : "float";
    return j;
}

inline RIFSSpec spec_from_json(const json& j) {
    RIFSSpec spec;
    std::string mode = j.value("mode", "rational");
    if (mode == "rational")
        spec.mode = ArithmeticMode::rational;
    else if (mode == "float")
        spec.mode = ArithmeticMode::floating;
    else
        throw Error(ErrorCode::Validation, "unknown mode: " + mode);
    for (const auto& r : j.at("ratios")) spec.ratios.push_back(rat_from_json(r));
    for (const auto& law : j.at("laws")) spec.laws.push_back(law_from_json(law));
    return spec;
}

inline json homogeneous_to_json(const HomogeneousRIFS& h) {
    json j;
    j["ratio"] = rat_to_json(h.ratio, h.mode);
    j["laws"] = json::array();
    for (const auto& law : h.laws) j["laws"].push_back(law_to_json(law, h.mode));
    j["mode"] = h.mode == ArithmeticMode::rational ? "rational" : "float";
    return j;
}

inline HomogeneousRIFS homogeneous_from_json(const json& j) {
    HomogeneousRIFS h;
    std::string mode = j.value("mode", "rational");
    h.mode = mode == "rational" ? ArithmeticMode::rational : ArithmeticMode::floating;
    h.ratio = rat_from_json(j.at("ratio"));
    for (const auto& law : j.at("laws")) h.laws.push_back(law_from_json(law));
    return h;
}

template <class T>
json interval_union_to_json(const IntervalUnion<T>& u, ArithmeticMode mode) {
    json j = json::array();
    for (const auto& c : u.components()) {
        json comp;
        if constexpr (std::is_same_v<T, Rat>) {
            comp["lo"] = rat_to_json(c.lo, mode);
            comp["hi"] = rat_to_json(c.hi, mode);
        } else {
            comp["lo"] = c.lo;
            comp["hi"] = c.hi;
        }
        comp["lo_closed"] = c.lo_closed;
        comp["hi_closed"] = c.hi_closed;
        j.push_back(comp);
    }
    return j;
}

} // namespace rifslab

#endif
