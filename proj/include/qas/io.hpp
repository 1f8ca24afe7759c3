#pragma once

#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qas/errors.hpp"
#include "qas/exact_cover.hpp"
#include "qas/ising.hpp"
#include "qas/spin.hpp"

namespace qas {

namespace detail {

inline nlohmann::ordered_json parse_document(std::istream& in, const std::string& context) {
    try {
        return nlohmann::ordered_json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(context + ": " + e.what());
    }
}

template <typename T>
T require_field(const nlohmann::ordered_json& doc, const std::string& key,
                const std::string& context) {
    if (!doc.contains(key))
        throw ParseError(context + ": missing field '" + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(context + ": field '" + key + "': " + e.what());
    }
}

} // namespace detail

inline void save_instance(const ProblemInstance& instance, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["n"] = instance.n();
    auto clauses = nlohmann::ordered_json::array();
    for (const Clause& c : instance.clauses())
        clauses.push_back({c[0], c[1], c[2]});
    doc["clauses"] = std::move(clauses);
    if (instance.solution())
        doc["solution"] = instance.solution()->to_ints();
    if (instance.label())
        doc["label"] = *instance.label();
    out << doc.dump(2) << '\n';
}

inline void save_instance(const ProblemInstance& instance, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write instance file: " + path);
    save_instance(instance, out);
}

inline ProblemInstance load_instance(std::istream& in, const std::string& context = "instance") {
    const auto doc = detail::parse_document(in, context);
    const int n = detail::require_field<int>(doc, "n", context);
    const auto raw_clauses =
        detail::require_field<std::vector<std::vector<int>>>(doc, "clauses", context);
    std::vector<Clause> clauses;
    clauses.reserve(raw_clauses.size());
    for (std::size_t i = 0; i < raw_clauses.size(); ++i) {
        if (raw_clauses[i].size() != 3)
            throw ParseError(context + ": clause " + std::to_string(i) +
                             " must have exactly 3 members, got " +
                             std::to_string(raw_clauses[i].size()));
        clauses.emplace_back(raw_clauses[i][0], raw_clauses[i][1], raw_clauses[i][2]);
    }
    std::optional<SpinConfiguration> solution;
    if (doc.contains("solution"))
        solution = SpinConfiguration(
            detail::require_field<std::vector<int>>(doc, "solution", context));
    std::optional<std::string> label;
    if (doc.contains("label"))
        label = detail::require_field<std::string>(doc, "label", context);
    return ProblemInstance(n, std::move(clauses), std::move(solution), std::move(label));
}

inline ProblemInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open instance file: " + path);
    return load_instance(in, path);
}

/// File name for instance alpha of size n inside an ensemble directory.
inline std::string instance_file_name(int n, int alpha) {
    return "inst_" + std::to_string(n) + "_" + std::to_string(alpha) + ".json";
}

inline void save_ising_model(const IsingModel& model, std::ostream& out) {
    nlohmann::ordered_json doc;
    doc["n"] = model.n;
    doc["offset"] = model.offset;
    doc["scale_factor"] = model.scale;
    doc["fields"] = model.fields;
    auto couplings = nlohmann::ordered_json::array();
    for (const auto& [key, J] : model.couplings)
        couplings.push_back({key.first, key.second, J});
    doc["couplings"] = std::move(couplings);
    out << doc.dump(2) << '\n';
}

inline void save_ising_model(const IsingModel& model, const std::string& path) {
    std::ofstream out(path);
    if (!out)
        throw Error("cannot write model file: " + path);
    save_ising_model(model, out);
}

inline IsingModel load_ising_model(std::istream& in, const std::string& context = "model") {
    const auto doc = detail::parse_document(in, context);
    IsingModel model(detail::require_field<int>(doc, "n", context));
    model.offset = detail::require_field<double>(doc, "offset", context);
    model.scale = detail::require_field<double>(doc, "scale_factor", context);
    const auto fields = detail::require_field<std::vector<double>>(doc, "fields", context);
    if (static_cast<int>(fields.size()) != model.n)
        throw ValidationError(context + ": fields length does not match n");
    model.fields = fields;
    for (const auto& entry :
         detail::require_field<std::vector<nlohmann::ordered_json>>(doc, "couplings", context)) {
        if (!entry.is_array() || entry.size() != 3)
            throw ParseError(context + ": couplings entries must be [i, j, J]");
        model.coupling(entry[0].get<int>(), entry[1].get<int>()) = entry[2].get<double>();
    }
    return model;
}

inline IsingModel load_ising_model(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw Error("cannot open model file: " + path);
    return load_ising_model(in, path);
}

} // namespace qas
