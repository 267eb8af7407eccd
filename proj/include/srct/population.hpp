#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srct/common.hpp"
#include "srct/jsonl.hpp"
#include "srct/name_table.hpp"
#include "srct/rng.hpp"

namespace srct::population {

using json = nlohmann::ordered_json;

// Categorical persona fields, in the canonical sampling order. Sampling
// draws attributes in this order regardless of how a spec file lists its
// marginals, so reordering a file does not change the population.
inline const std::array<std::string, 9>& categorical_fields() {
    static const std::array<std::string, 9> fields = {
        "gender",     "race",       "political_lean", "education", "income_bracket",
        "employment", "homeownership", "religion",    "marital_status"};
    return fields;
}

struct CategoryWeight {
    std::string label;
    double probability = 0.0;
};

struct Marginal {
    std::vector<CategoryWeight> categories;
};

struct AgeParams {
    double mean = 46.0;
    double median = 43.0;
    int min = 18;
    int max = 100;
};

struct IqParams {
    double mean = 100.0;
    double sd = 15.0;
    int min = 55;
    int max = 145;
};

struct DemographicSpec {
    std::map<std::string, Marginal> marginals;  // keyed by categorical field name
    AgeParams age;
    IqParams iq;
    std::uint64_t seed = 0;

    void validate() const {
        for (const auto& [attr, marginal] : marginals) {
            bool known = false;
            for (const auto& f : categorical_fields())
                if (f == attr) known = true;
            if (!known)
                throw std::invalid_argument("demographic spec: unknown attribute \"" + attr + "\"");
            if (marginal.categories.empty())
                throw std::invalid_argument("demographic spec: attribute \"" + attr +
                                            "\" has no categories");
            double sum = 0.0;
            for (const auto& cw : marginal.categories) {
                if (cw.probability < 0.0 || cw.probability > 1.0)
                    throw std::invalid_argument("demographic spec: attribute \"" + attr +
                                                "\" category \"" + cw.label +
                                                "\" probability outside [0,1]");
                sum += cw.probability;
            }
            if (std::abs(sum - 1.0) > 1e-9)
                throw std::invalid_argument("demographic spec: attribute \"" + attr +
                                            "\" probabilities sum to " + std::to_string(sum) +
                                            ", expected 1");
        }
        if (!(age.min >= 18 && age.min < age.max && age.max <= 100))
            throw std::invalid_argument(
                "demographic spec: age bounds must satisfy 18 <= min < max <= 100");
        if (age.mean < age.median)
            throw std::invalid_argument(
                "demographic spec: age mean must be >= median for the log-normal fit");
        if (age.median <= 0.0)
            throw std::invalid_argument("demographic spec: age median must be positive");
        if (!(iq.min >= 55 && iq.min < iq.max && iq.max <= 145))
            throw std::invalid_argument(
                "demographic spec: iq bounds must satisfy 55 <= min < max <= 145");
        if (iq.sd < 0.0) throw std::invalid_argument("demographic spec: iq sd must be >= 0");
    }
};

struct Persona {
    std::string id;
    std::string name;
    int age = 0;
    std::string gender;
    std::string race;
    std::string political_lean;
    std::string education;
    std::string income_bracket;
    std::string employment;
    std::string homeownership;
    std::string religion;
    std::string marital_status;
    int iq = 100;
    std::string personality_text;

    const std::string& categorical(const std::string& field) const {
        if (field == "gender") return gender;
        if (field == "race") return race;
        if (field == "political_lean") return political_lean;
        if (field == "education") return education;
        if (field == "income_bracket") return income_bracket;
        if (field == "employment") return employment;
        if (field == "homeownership") return homeownership;
        if (field == "religion") return religion;
        if (field == "marital_status") return marital_status;
        throw std::invalid_argument("unknown categorical field \"" + field + "\"");
    }

    std::string& categorical(const std::string& field) {
        return const_cast<std::string&>(static_cast<const Persona*>(this)->categorical(field));
    }

    // Slot values available to preamble templates.
    std::optional<std::string> slot_value(const std::string& slot) const {
        if (slot == "id") return id;
        if (slot == "name") return name;
        if (slot == "age") return std::to_string(age);
        if (slot == "iq") return std::to_string(iq);
        if (slot == "personality_text") return personality_text;
        for (const auto& f : categorical_fields())
            if (f == slot) return categorical(slot);
        return std::nullopt;
    }
};

inline json to_json(const Persona& p) {
    json j;
    j["id"] = p.id;
    j["name"] = p.name;
    j["age"] = p.age;
    for (const auto& f : categorical_fields()) j[f] = p.categorical(f);
    j["iq"] = p.iq;
    j["personality_text"] = p.personality_text;
    return j;
}

inline Persona persona_from_json(const json& j) {
    Persona p;
    const auto str = [&](const char* key) -> std::string {
        if (!j.contains(key) || !j.at(key).is_string())
            throw std::invalid_argument(std::string("field \"") + key + "\" missing or not a string");
        return j.at(key).get<std::string>();
    };
    p.id = str("id");
    p.name = str("name");
    if (!j.contains("age") || !j.at("age").is_number_integer())
        throw std::invalid_argument("field \"age\" missing or not an integer");
    p.age = j.at("age").get<int>();
    for (const auto& f : categorical_fields()) p.categorical(f) = str(f.c_str());
    if (!j.contains("iq") || !j.at("iq").is_number_integer())
        throw std::invalid_argument("field \"iq\" missing or not an integer");
    p.iq = j.at("iq").get<int>();
    p.personality_text = str("personality_text");
    if (p.age < 18 || p.age > 100)
        throw std::invalid_argument("field \"age\" outside [18,100]");
    if (p.iq < 55 || p.iq > 145)
        throw std::invalid_argument("field \"iq\" outside [55,145]");
    return p;
}

namespace detail {

inline std::string pronoun_subject(const std::string& gender) {
    const std::string g = name_table::normalize_key(gender);
    if (g == "female" || g == "woman") return "She";
    if (g == "male" || g == "man") return "He";
    return "They";
}

inline std::string pronoun_possessive(const std::string& gender) {
    const std::string g = name_table::normalize_key(gender);
    if (g == "female" || g == "woman") return "her";
    if (g == "male" || g == "man") return "his";
    return "their";
}

inline std::string iq_phrase(int iq) {
    if (iq >= 115) return "above-average intelligence";
    if (iq >= 85) return "average intelligence";
    return "a practical, concrete way of thinking";
}

// Deterministic personality prose composed from the attributes. Loaded
// populations keep whatever prose their file carries; this is only the
// default for sampled personas.
inline std::string compose_personality(const Persona& p) {
    static const std::array<const char*, 6> temperaments = {
        "steady and grounded",          "curious and talkative",
        "reserved but attentive",       "warm and community-minded",
        "pragmatic and direct",         "easygoing and deliberate"};
    const auto pick = rng::fnv1a(p.id) % temperaments.size();
    std::ostringstream ss;
    ss << p.name << ", at " << p.age << " with " << p.education << " education, is "
       << p.employment << " and in the " << p.income_bracket << " income bracket. "
       << pronoun_subject(p.gender) << " is " << p.homeownership << ", " << p.religion << ", "
       << p.political_lean << ", and " << p.marital_status << ". An IQ of " << p.iq
       << " suggests " << iq_phrase(p.iq) << ". Overall, " << pronoun_possessive(p.gender)
       << " temperament is " << temperaments[pick] << ".";
    return ss.str();
}

inline int sample_age(const AgeParams& age, rng::Rng& r) {
    // Log-normal fitted to (mean, median): median = exp(mu), mean = exp(mu + s^2/2).
    const double mu = std::log(age.median);
    const double ratio = age.mean / age.median;
    const double sigma = ratio > 1.0 ? std::sqrt(2.0 * std::log(ratio)) : 0.0;
    const double raw = std::exp(mu + sigma * r.normal());
    int years = static_cast<int>(std::lround(raw));
    if (years < age.min) years = age.min;
    if (years > age.max) years = age.max;
    return years;
}

inline int sample_iq(const IqParams& iq, rng::Rng& r) {
    int v = static_cast<int>(std::lround(r.normal(iq.mean, iq.sd)));
    if (v < iq.min) v = iq.min;
    if (v > iq.max) v = iq.max;
    return v;
}

inline std::string sample_category(const Marginal& m, rng::Rng& r) {
    std::vector<double> cumulative;
    cumulative.reserve(m.categories.size());
    double acc = 0.0;
    for (const auto& cw : m.categories) {
        acc += cw.probability;
        cumulative.push_back(acc);
    }
    cumulative.back() = 1.0;  // absorb rounding so the last bin closes the unit interval
    return m.categories[r.categorical(cumulative)].label;
}

}  // namespace detail

// Samples n personas. Deterministic for a fixed (spec, n, spec.seed): each
// persona draws from its own derived stream, so populations of different
// sizes share a common prefix.
inline std::vector<Persona> sample_population(const DemographicSpec& spec, std::size_t n) {
    if (n < 1) throw std::invalid_argument("sample_population: n must be >= 1");
    spec.validate();
    std::vector<Persona> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        rng::Rng r(rng::derive(spec.seed, "persona", static_cast<std::uint64_t>(i)));
        Persona p;
        {
            std::ostringstream id;
            id << 'p';
            id.width(5);
            id.fill('0');
            id << i;
            p.id = id.str();
        }
        for (const auto& field : categorical_fields()) {
            const auto it = spec.marginals.find(field);
            p.categorical(field) = it == spec.marginals.end()
                                       ? std::string("unspecified")
                                       : detail::sample_category(it->second, r);
        }
        p.age = detail::sample_age(spec.age, r);
        p.iq = detail::sample_iq(spec.iq, r);
        const auto& firsts = name_table::first_names_for(p.gender, p.race);
        const auto& lasts = name_table::last_names_for(p.race);
        p.name = std::string(firsts[r.below(firsts.size())]) + " " +
                 std::string(lasts[r.below(lasts.size())]);
        p.personality_text = detail::compose_personality(p);
        out.push_back(std::move(p));
    }
    return out;
}

// Substitutes {slot} markers with persona fields. Unknown slot names are
// rejected by name; everything else passes through verbatim.
inline std::string render_persona_preamble(const Persona& persona, const std::string& tmpl) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t pos = 0;
    while (pos < tmpl.size()) {
        const std::size_t open = tmpl.find('{', pos);
        if (open == std::string::npos) {
            out.append(tmpl, pos, std::string::npos);
            break;
        }
        out.append(tmpl, pos, open - pos);
        const std::size_t close = tmpl.find('}', open + 1);
        if (close == std::string::npos) {
            out.append(tmpl, open, std::string::npos);
            break;
        }
        const std::string slot = tmpl.substr(open + 1, close - open - 1);
        const bool slot_like =
            !slot.empty() && slot.find_first_not_of(
                                 "abcdefghijklmnopqrstuvwxyz"
                                 "ABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789_") == std::string::npos;
        if (!slot_like) {
            out.append(tmpl, open, close - open + 1);
            pos = close + 1;
            continue;
        }
        const auto value = persona.slot_value(slot);
        if (!value)
            throw std::invalid_argument("persona template: unknown slot \"" + slot + "\"");
        out += *value;
        pos = close + 1;
    }
    return out;
}

inline void save_population(const std::string& path, const std::vector<Persona>& personas) {
    std::vector<json> records;
    records.reserve(personas.size());
    for (const auto& p : personas) records.push_back(to_json(p));
    jsonl::write_records(path, records);
}

// Loads a population file (JSONL or a whole-file JSON array). Every record
// must satisfy the persona invariants; ids must be unique.
inline std::vector<Persona> load_population(const std::string& path) {
    const auto records = jsonl::read_records(path);
    std::vector<Persona> out;
    out.reserve(records.size());
    std::map<std::string, std::size_t> seen;
    for (std::size_t i = 0; i < records.size(); ++i) {
        Persona p;
        try {
            p = persona_from_json(records[i]);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument(path + ": record " + std::to_string(i) + ": " + e.what());
        }
        const auto [it, inserted] = seen.emplace(p.id, i);
        if (!inserted)
            throw std::invalid_argument(path + ": record " + std::to_string(i) +
                                        ": duplicate id \"" + p.id + "\" (first at record " +
                                        std::to_string(it->second) + ")");
        out.push_back(std::move(p));
    }
    return out;
}

struct CategoryDeviation {
    std::string category;
    double target = 0.0;
    double realized = 0.0;
    double deviation = 0.0;
};

struct AttributeReport {
    std::string attribute;
    std::vector<CategoryDeviation> categories;
    bool pass = true;
};

struct MarginalReport {
    std::vector<AttributeReport> attributes;
    double tolerance = 0.0;
    bool all_pass = true;
};

// Compares realized category proportions against the spec's targets. Always
// produces a report; pass/fail is per attribute at the given tolerance.
inline MarginalReport validate_marginals(const std::vector<Persona>& population,
                                         const DemographicSpec& spec, double tolerance) {
    if (population.empty())
        throw std::invalid_argument("validate_marginals: population is empty");
    MarginalReport report;
    report.tolerance = tolerance;
    const double n = static_cast<double>(population.size());
    for (const auto& [attr, marginal] : spec.marginals) {
        AttributeReport ar;
        ar.attribute = attr;
        std::map<std::string, std::size_t> counts;
        for (const auto& p : population) counts[p.categorical(attr)]++;
        for (const auto& cw : marginal.categories) {
            CategoryDeviation dev;
            dev.category = cw.label;
            dev.target = cw.probability;
            dev.realized = counts.count(cw.label) ? counts[cw.label] / n : 0.0;
            dev.deviation = std::abs(dev.realized - dev.target);
            if (dev.deviation > tolerance) ar.pass = false;
            ar.categories.push_back(dev);
            counts.erase(cw.label);
        }
        for (const auto& [label, count] : counts) {  // realized values the spec never declared
            CategoryDeviation dev;
            dev.category = label;
            dev.target = 0.0;
            dev.realized = count / n;
            dev.deviation = dev.realized;
            if (dev.deviation > tolerance) ar.pass = false;
            ar.categories.push_back(dev);
        }
        report.all_pass = report.all_pass && ar.pass;
        report.attributes.push_back(std::move(ar));
    }
    return report;
}

// --- demographic spec file format -------------------------------------------

inline DemographicSpec demographic_spec_from_json(const json& j) {
    DemographicSpec spec;
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("age")) {
        const auto& a = j.at("age");
        if (a.contains("mean")) spec.age.mean = a.at("mean").get<double>();
        if (a.contains("median")) spec.age.median = a.at("median").get<double>();
        if (a.contains("min")) spec.age.min = a.at("min").get<int>();
        if (a.contains("max")) spec.age.max = a.at("max").get<int>();
    }
    if (j.contains("iq")) {
        const auto& q = j.at("iq");
        if (q.contains("mean")) spec.iq.mean = q.at("mean").get<double>();
        if (q.contains("sd")) spec.iq.sd = q.at("sd").get<double>();
        if (q.contains("min")) spec.iq.min = q.at("min").get<int>();
        if (q.contains("max")) spec.iq.max = q.at("max").get<int>();
    }
    if (j.contains("marginals")) {
        for (const auto& [attr, cats] : j.at("marginals").items()) {
            Marginal m;
            for (const auto& [label, prob] : cats.items())
                m.categories.push_back({label, prob.get<double>()});
            spec.marginals[attr] = std::move(m);
        }
    }
    spec.validate();
    return spec;
}

inline DemographicSpec load_demographic_spec(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": invalid JSON: " + e.what());
    }
    try {
        return demographic_spec_from_json(j);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace srct::population
