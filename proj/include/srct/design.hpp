#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "srct/common.hpp"
#include "srct/population.hpp"
#include "srct/rng.hpp"

namespace srct::design {

using json = nlohmann::ordered_json;

enum class FactorRole { within_subject, between_subject };

struct FactorLevel {
    std::string label;  // canonical identifier used in conditions and analysis
    std::string text;   // phrasing substituted into vignette bodies (defaults to label)
};

struct Factor {
    std::string name;
    std::vector<FactorLevel> levels;
    FactorRole role = FactorRole::within_subject;

    void validate() const {
        if (name.empty()) throw std::invalid_argument("factor with empty name");
        if (levels.size() < 2)
            throw std::invalid_argument("factor \"" + name + "\" needs at least 2 levels, has " +
                                        std::to_string(levels.size()));
        std::set<std::string> seen;
        for (const auto& l : levels)
            if (!seen.insert(l.label).second)
                throw std::invalid_argument("factor \"" + name + "\" has duplicate level \"" +
                                            l.label + "\"");
    }

    const FactorLevel& level(const std::string& label) const {
        for (const auto& l : levels)
            if (l.label == label) return l;
        throw std::invalid_argument("factor \"" + name + "\" has no level \"" + label + "\"");
    }
};

inline Factor make_factor(std::string name, std::vector<FactorLevel> levels, FactorRole role) {
    Factor f{std::move(name), std::move(levels), role};
    f.validate();
    return f;
}

enum class AnswerKind { binary_verdict, integer_scale };

struct QuestionItem {
    std::string id;
    std::string prompt;
    AnswerKind kind = AnswerKind::integer_scale;
    int lo = 0;
    int hi = 10;
    std::string scale_meaning;
    // Extraction cues for binary verdicts ("negligent" / "not negligent").
    std::vector<std::string> positive_terms = {"yes"};
    std::vector<std::string> negative_terms = {"no"};

    void validate() const {
        if (id.empty()) throw std::invalid_argument("question with empty id");
        if (kind == AnswerKind::integer_scale && lo >= hi)
            throw std::invalid_argument("question \"" + id + "\": scale requires lo < hi");
    }
};

struct Vignette {
    std::string id;
    std::string body_template;
    std::vector<std::string> question_ids;
};

enum class PersonaArm { persona, no_persona, both };

inline std::string arm_name(bool with_persona) { return with_persona ? "persona" : "no-persona"; }

// How analysis turns per-question answers into a scored outcome.
struct OutcomeDef {
    enum class Kind { question, composite_negligence };
    std::string id;
    Kind kind = Kind::question;
    std::string question;            // kind == question
    std::string verdict_question;    // kind == composite_negligence
    std::string confidence_question; // kind == composite_negligence
};

struct PopulationRef {
    std::string file;  // path to a persona file, resolved relative to the spec
    std::optional<population::DemographicSpec> demographics;  // inline spec alternative
    std::size_t n = 0;
};

struct ExperimentSpec {
    std::string name;
    std::vector<Vignette> vignettes;
    std::vector<Factor> factors;
    std::vector<QuestionItem> questions;
    PopulationRef population;
    std::vector<std::string> model_ids;
    PersonaArm persona_arm = PersonaArm::persona;
    bool shuffle_questions = false;
    std::string persona_template;
    std::string response_instruction;
    std::vector<OutcomeDef> outcomes;
    std::string baselines_file;  // optional, resolved relative to the spec
    std::uint64_t seed = 0;
    json mock_policy;  // consumed by the mock provider under --mock

    std::vector<Factor> within_factors() const {
        std::vector<Factor> out;
        for (const auto& f : factors)
            if (f.role == FactorRole::within_subject) out.push_back(f);
        return out;
    }

    std::vector<Factor> between_factors() const {
        std::vector<Factor> out;
        for (const auto& f : factors)
            if (f.role == FactorRole::between_subject) out.push_back(f);
        return out;
    }

    const Vignette& vignette(const std::string& id) const {
        for (const auto& v : vignettes)
            if (v.id == id) return v;
        throw std::invalid_argument("spec \"" + name + "\" has no vignette \"" + id + "\"");
    }

    const QuestionItem& question(const std::string& id) const {
        for (const auto& q : questions)
            if (q.id == id) return q;
        throw std::invalid_argument("spec \"" + name + "\" has no question \"" + id + "\"");
    }

    void validate() const {
        if (name.empty()) throw std::invalid_argument("experiment spec: name is required");
        if (model_ids.empty())
            throw std::invalid_argument("experiment spec \"" + name + "\": model_ids is empty");
        if (vignettes.empty())
            throw std::invalid_argument("experiment spec \"" + name + "\": no vignettes");
        std::set<std::string> names;
        for (const auto& f : factors) {
            f.validate();
            if (!names.insert(f.name).second)
                throw std::invalid_argument("duplicate factor \"" + f.name + "\"");
        }
        std::set<std::string> qids;
        for (const auto& q : questions) {
            q.validate();
            if (!qids.insert(q.id).second)
                throw std::invalid_argument("duplicate question \"" + q.id + "\"");
        }
        std::set<std::string> vids;
        for (const auto& v : vignettes) {
            if (!vids.insert(v.id).second)
                throw std::invalid_argument("duplicate vignette \"" + v.id + "\"");
            if (v.question_ids.empty())
                throw std::invalid_argument("vignette \"" + v.id + "\" lists no questions");
            for (const auto& qid : v.question_ids)
                if (!qids.count(qid))
                    throw std::invalid_argument("vignette \"" + v.id +
                                                "\" references unknown question \"" + qid + "\"");
            for (const auto& f : factors) {
                if (f.role != FactorRole::within_subject) continue;
                const std::string slot = "{" + f.name + "}";
                std::size_t count = 0, pos = 0;
                while ((pos = v.body_template.find(slot, pos)) != std::string::npos) {
                    ++count;
                    pos += slot.size();
                }
                if (count != 1)
                    throw std::invalid_argument("vignette \"" + v.id + "\" must contain exactly one {" +
                                                f.name + "} slot, found " + std::to_string(count));
            }
        }
        for (const auto& o : outcomes) {
            if (o.kind == OutcomeDef::Kind::question) {
                if (!qids.count(o.question))
                    throw std::invalid_argument("outcome \"" + o.id +
                                                "\" references unknown question \"" + o.question + "\"");
            } else {
                if (!qids.count(o.verdict_question) || !qids.count(o.confidence_question))
                    throw std::invalid_argument("outcome \"" + o.id +
                                                "\" references unknown verdict/confidence questions");
            }
        }
    }
};

// One assignment of a level to every factor in a factor subset, in the
// spec's factor order.
struct Condition {
    std::vector<std::pair<std::string, std::string>> assignments;  // (factor, level label)

    const std::string* level_of(const std::string& factor) const {
        for (const auto& [f, l] : assignments)
            if (f == factor) return &l;
        return nullptr;
    }

    std::string label() const {
        std::string out;
        for (const auto& [f, l] : assignments) {
            if (!out.empty()) out += ',';
            out += f + "=" + l;
        }
        return out;
    }

    bool operator==(const Condition& other) const { return assignments == other.assignments; }
};

// Full cartesian product of factor levels. Canonical order: the first
// factor varies slowest, the last fastest.
inline std::vector<Condition> expand_conditions(const std::vector<Factor>& factors) {
    if (factors.empty()) throw std::invalid_argument("expand_conditions: no factors");
    for (const auto& f : factors) f.validate();
    std::vector<Condition> out{Condition{}};
    for (const auto& f : factors) {
        std::vector<Condition> next;
        next.reserve(out.size() * f.levels.size());
        for (const auto& base : out) {
            for (const auto& level : f.levels) {
                Condition c = base;
                c.assignments.emplace_back(f.name, level.label);
                next.push_back(std::move(c));
            }
        }
        out = std::move(next);
    }
    return out;
}

struct TrialPlan {
    std::string trial_id;
    std::size_t ordinal = 0;  // position in the plan list; also used by mock policies
    std::optional<std::string> persona_id;
    std::string subject_key;  // persona id, or a slot key in the no-persona arm
    std::string model_id;
    Condition condition;
    std::vector<std::string> vignette_order;
    std::map<std::string, std::vector<std::string>> question_order;  // per vignette
    std::size_t position = 0;  // presentation position within the subject
    std::uint64_t seed = 0;
};

namespace detail {

struct Subject {
    std::optional<std::string> persona_id;
    std::string key;
};

inline std::vector<Subject> subjects_for_arm(const std::vector<population::Persona>& personas,
                                             bool with_persona) {
    std::vector<Subject> out;
    out.reserve(personas.size());
    for (std::size_t i = 0; i < personas.size(); ++i) {
        if (with_persona) {
            out.push_back({personas[i].id, personas[i].id});
        } else {
            std::ostringstream key;
            key << "anon-";
            key.width(5);
            key.fill('0');
            key << i;
            out.push_back({std::nullopt, key.str()});
        }
    }
    return out;
}

inline std::vector<bool> arms_of(PersonaArm arm) {
    switch (arm) {
        case PersonaArm::persona: return {true};
        case PersonaArm::no_persona: return {false};
        case PersonaArm::both: return {true, false};
    }
    return {true};
}

inline std::vector<std::string> question_order_for(const ExperimentSpec& spec,
                                                   const Vignette& v, std::uint64_t trial_seed) {
    std::vector<std::string> order = v.question_ids;
    if (spec.shuffle_questions) {
        rng::Rng r(rng::derive(trial_seed, "question-order", v.id));
        r.shuffle(order);
    }
    return order;
}

inline std::string make_trial_id(const ExperimentSpec& spec, const std::string& arm,
                                 const std::string& model, const std::string& subject,
                                 std::size_t position) {
    std::ostringstream id;
    id << spec.name << ':' << arm << ':' << model << ':' << subject << ":t" << position;
    return id.str();
}

}  // namespace detail

// Within-subject planner. Every subject (persona x model pairing) sees every
// within-factor combination exactly once; a seeded bijection decides which
// vignette carries which combination, and a second seeded permutation decides
// presentation order. Each vignette is dispatched as its own isolated session,
// so a subject's trials share nothing but the plan metadata.
inline std::vector<TrialPlan> plan_within_subject(const ExperimentSpec& spec,
                                                  const std::vector<population::Persona>& personas,
                                                  const std::vector<std::string>& models) {
    spec.validate();
    const auto combos = expand_conditions(spec.within_factors());
    if (combos.size() != spec.vignettes.size())
        throw std::invalid_argument(
            "within-subject design requires one vignette per factor combination: " +
            std::to_string(combos.size()) + " combinations vs " +
            std::to_string(spec.vignettes.size()) + " vignettes");

    std::vector<TrialPlan> plans;
    for (bool with_persona : detail::arms_of(spec.persona_arm)) {
        const auto arm = arm_name(with_persona);
        const auto subjects = detail::subjects_for_arm(personas, with_persona);
        for (const auto& model : models) {
            for (const auto& subject : subjects) {
                const std::size_t v_count = spec.vignettes.size();
                std::vector<std::size_t> combo_of(v_count);
                for (std::size_t i = 0; i < v_count; ++i) combo_of[i] = i;
                rng::Rng bij(rng::derive(spec.seed, "within-bijection",
                                         arm + "/" + model + "/" + subject.key));
                bij.shuffle(combo_of);
                std::vector<std::size_t> order(v_count);
                for (std::size_t i = 0; i < v_count; ++i) order[i] = i;
                rng::Rng ord(rng::derive(spec.seed, "within-order",
                                         arm + "/" + model + "/" + subject.key));
                ord.shuffle(order);

                for (std::size_t pos = 0; pos < v_count; ++pos) {
                    const std::size_t v_idx = order[pos];
                    const Vignette& v = spec.vignettes[v_idx];
                    TrialPlan plan;
                    plan.trial_id = detail::make_trial_id(spec, arm, model, subject.key, pos);
                    plan.ordinal = plans.size();
                    plan.persona_id = subject.persona_id;
                    plan.subject_key = subject.key;
                    plan.model_id = model;
                    plan.condition = combos[combo_of[v_idx]];
                    plan.vignette_order = {v.id};
                    plan.position = pos;
                    plan.seed = rng::derive(spec.seed, "trial", plan.trial_id);
                    plan.question_order[v.id] = detail::question_order_for(spec, v, plan.seed);
                    plans.push_back(std::move(plan));
                }
            }
        }
    }
    return plans;
}

namespace detail {

// Shared allocator for between-subject and flat (no-factor) designs.
inline std::vector<TrialPlan> plan_allocated(const ExperimentSpec& spec,
                                             const std::vector<population::Persona>& personas,
                                             const std::vector<std::string>& models,
                                             const std::vector<Condition>& conditions) {
    std::vector<TrialPlan> plans;
    for (bool with_persona : arms_of(spec.persona_arm)) {
        const auto arm = arm_name(with_persona);
        const auto subjects = subjects_for_arm(personas, with_persona);
        for (const auto& model : models) {
            // Block randomization: shuffle the condition list once per block of
            // |conditions| subjects, so arm sizes within a stratum differ by at
            // most one.
            std::vector<std::size_t> assignment(subjects.size());
            const std::size_t block = conditions.size();
            for (std::size_t start = 0; start < subjects.size(); start += block) {
                std::vector<std::size_t> slots(block);
                for (std::size_t i = 0; i < block; ++i) slots[i] = i;
                rng::Rng r(rng::derive(spec.seed, "blocks",
                                       arm + "/" + model + "/b" + std::to_string(start / block)));
                r.shuffle(slots);
                for (std::size_t i = 0; i < block && start + i < subjects.size(); ++i)
                    assignment[start + i] = slots[i];
            }
            for (std::size_t s = 0; s < subjects.size(); ++s) {
                TrialPlan plan;
                plan.trial_id = make_trial_id(spec, arm, model, subjects[s].key, 0);
                plan.ordinal = plans.size();
                plan.persona_id = subjects[s].persona_id;
                plan.subject_key = subjects[s].key;
                plan.model_id = model;
                plan.condition = conditions[assignment[s]];
                plan.seed = rng::derive(spec.seed, "trial", plan.trial_id);
                for (const auto& v : spec.vignettes) {
                    plan.vignette_order.push_back(v.id);
                    plan.question_order[v.id] = question_order_for(spec, v, plan.seed);
                }
                plans.push_back(std::move(plan));
            }
        }
    }
    return plans;
}

}  // namespace detail

// Between-subject planner: each subject is randomized to exactly one
// condition by seeded block randomization per model stratum.
inline std::vector<TrialPlan> plan_between_subject(const ExperimentSpec& spec,
                                                   const std::vector<population::Persona>& personas,
                                                   const std::vector<std::string>& models) {
    spec.validate();
    const auto between = spec.between_factors();
    if (between.empty())
        throw std::invalid_argument("between-subject design requires at least one between-subject factor");
    return detail::plan_allocated(spec, personas, models, expand_conditions(between));
}

// Dispatches on the spec's factor roles: within-subject factors demand the
// bijection planner, between-subject factors the block-randomized one, and a
// factorless spec is a flat survey (every subject sees the same materials).
inline std::vector<TrialPlan> plan_experiment(const ExperimentSpec& spec,
                                              const std::vector<population::Persona>& personas) {
    spec.validate();
    const bool has_within = !spec.within_factors().empty();
    const bool has_between = !spec.between_factors().empty();
    if (has_within && has_between)
        throw std::invalid_argument("mixed within/between factor designs are not supported");
    if (has_within) return plan_within_subject(spec, personas, spec.model_ids);
    if (has_between) return plan_between_subject(spec, personas, spec.model_ids);
    return detail::plan_allocated(spec, personas, spec.model_ids, {Condition{}});
}

struct Message {
    std::string role;
    std::string content;
};

// Renders the ordered message list for one trial: optional persona preamble,
// then each vignette body (factor slots substituted) followed by its
// questions and the free-text response instruction.
inline std::vector<Message> render_trial_prompt(const TrialPlan& plan, const ExperimentSpec& spec,
                                                const std::optional<std::string>& persona_preamble) {
    std::vector<Message> messages;
    if (persona_preamble) messages.push_back({"system", *persona_preamble});

    for (const auto& vid : plan.vignette_order) {
        const Vignette& v = spec.vignette(vid);
        std::string body;
        body.reserve(v.body_template.size());
        std::size_t pos = 0;
        while (pos < v.body_template.size()) {
            const std::size_t open = v.body_template.find('{', pos);
            if (open == std::string::npos) {
                body.append(v.body_template, pos, std::string::npos);
                break;
            }
            body.append(v.body_template, pos, open - pos);
            const std::size_t close = v.body_template.find('}', open + 1);
            if (close == std::string::npos) {
                body.append(v.body_template, open, std::string::npos);
                break;
            }
            const std::string slot = v.body_template.substr(open + 1, close - open - 1);
            const std::string* level = plan.condition.level_of(slot);
            if (!level)
                throw std::invalid_argument("vignette \"" + vid + "\": unresolved slot \"" + slot +
                                            "\"");
            bool substituted = false;
            for (const auto& f : spec.factors) {
                if (f.name == slot) {
                    body += f.level(*level).text;
                    substituted = true;
                    break;
                }
            }
            if (!substituted)
                throw std::invalid_argument("vignette \"" + vid + "\": unresolved slot \"" + slot +
                                            "\"");
            pos = close + 1;
        }

        std::ostringstream content;
        content << body << "\n\n";
        const auto& order = plan.question_order.at(vid);
        for (std::size_t i = 0; i < order.size(); ++i) {
            const QuestionItem& q = spec.question(order[i]);
            content << (i + 1) << ". " << q.prompt;
            if (q.kind == AnswerKind::integer_scale) {
                content << " Answer on a scale from " << q.lo << " to " << q.hi;
                if (!q.scale_meaning.empty()) content << " (" << q.scale_meaning << ")";
                content << '.';
            }
            content << '\n';
        }
        if (!spec.response_instruction.empty()) content << '\n' << spec.response_instruction;
        messages.push_back({"user", content.str()});
    }
    return messages;
}

// --- serialization -----------------------------------------------------------

inline json to_json(const TrialPlan& p) {
    json j;
    j["trial_id"] = p.trial_id;
    j["ordinal"] = p.ordinal;
    if (p.persona_id) j["persona_id"] = *p.persona_id;
    j["subject_key"] = p.subject_key;
    j["model_id"] = p.model_id;
    json cond = json::object();
    for (const auto& [f, l] : p.condition.assignments) cond[f] = l;
    j["condition"] = cond;
    j["vignette_order"] = p.vignette_order;
    json qo = json::object();
    for (const auto& [vid, order] : p.question_order) qo[vid] = order;
    j["question_order"] = qo;
    j["position"] = p.position;
    j["seed"] = p.seed;
    return j;
}

inline TrialPlan plan_from_json(const json& j) {
    TrialPlan p;
    p.trial_id = j.at("trial_id").get<std::string>();
    p.ordinal = j.at("ordinal").get<std::size_t>();
    if (j.contains("persona_id")) p.persona_id = j.at("persona_id").get<std::string>();
    p.subject_key = j.at("subject_key").get<std::string>();
    p.model_id = j.at("model_id").get<std::string>();
    for (const auto& [f, l] : j.at("condition").items())
        p.condition.assignments.emplace_back(f, l.get<std::string>());
    p.vignette_order = j.at("vignette_order").get<std::vector<std::string>>();
    for (const auto& [vid, order] : j.at("question_order").items())
        p.question_order[vid] = order.get<std::vector<std::string>>();
    p.position = j.at("position").get<std::size_t>();
    p.seed = j.at("seed").get<std::uint64_t>();
    return p;
}

inline json to_json(const ExperimentSpec& spec) {
    json j;
    j["name"] = spec.name;
    j["seed"] = spec.seed;
    switch (spec.persona_arm) {
        case PersonaArm::persona: j["persona_arm"] = "persona"; break;
        case PersonaArm::no_persona: j["persona_arm"] = "no-persona"; break;
        case PersonaArm::both: j["persona_arm"] = "both"; break;
    }
    j["shuffle_questions"] = spec.shuffle_questions;
    j["models"] = spec.model_ids;
    json factors = json::array();
    for (const auto& f : spec.factors) {
        json jf;
        jf["name"] = f.name;
        jf["role"] = f.role == FactorRole::within_subject ? "within" : "between";
        json levels = json::array();
        for (const auto& l : f.levels) {
            json jl;
            jl["label"] = l.label;
            if (l.text != l.label) jl["text"] = l.text;
            levels.push_back(jl);
        }
        jf["levels"] = levels;
        factors.push_back(jf);
    }
    j["factors"] = factors;
    json questions = json::array();
    for (const auto& q : spec.questions) {
        json jq;
        jq["id"] = q.id;
        jq["prompt"] = q.prompt;
        jq["kind"] = q.kind == AnswerKind::binary_verdict ? "binary-verdict" : "integer-scale";
        if (q.kind == AnswerKind::integer_scale) {
            jq["lo"] = q.lo;
            jq["hi"] = q.hi;
            if (!q.scale_meaning.empty()) jq["scale_meaning"] = q.scale_meaning;
        } else {
            jq["positive_terms"] = q.positive_terms;
            jq["negative_terms"] = q.negative_terms;
        }
        questions.push_back(jq);
    }
    j["questions"] = questions;
    json vignettes = json::array();
    for (const auto& v : spec.vignettes) {
        json jv;
        jv["id"] = v.id;
        jv["body_template"] = v.body_template;
        jv["questions"] = v.question_ids;
        vignettes.push_back(jv);
    }
    j["vignettes"] = vignettes;
    json popref;
    if (!spec.population.file.empty()) popref["file"] = spec.population.file;
    if (spec.population.demographics) {
        json d;
        d["seed"] = spec.population.demographics->seed;
        d["age"] = {{"mean", spec.population.demographics->age.mean},
                    {"median", spec.population.demographics->age.median},
                    {"min", spec.population.demographics->age.min},
                    {"max", spec.population.demographics->age.max}};
        d["iq"] = {{"mean", spec.population.demographics->iq.mean},
                   {"sd", spec.population.demographics->iq.sd},
                   {"min", spec.population.demographics->iq.min},
                   {"max", spec.population.demographics->iq.max}};
        json m = json::object();
        for (const auto& [attr, marginal] : spec.population.demographics->marginals) {
            json cats = json::object();
            for (const auto& cw : marginal.categories) cats[cw.label] = cw.probability;
            m[attr] = cats;
        }
        d["marginals"] = m;
        popref["demographics"] = d;
    }
    popref["n"] = spec.population.n;
    j["population"] = popref;
    if (!spec.persona_template.empty()) j["persona_template"] = spec.persona_template;
    if (!spec.response_instruction.empty()) j["response_instruction"] = spec.response_instruction;
    if (!spec.outcomes.empty()) {
        json outs = json::array();
        for (const auto& o : spec.outcomes) {
            json jo;
            jo["id"] = o.id;
            if (o.kind == OutcomeDef::Kind::question) {
                jo["kind"] = "question";
                jo["question"] = o.question;
            } else {
                jo["kind"] = "composite-negligence";
                jo["verdict_question"] = o.verdict_question;
                jo["confidence_question"] = o.confidence_question;
            }
            outs.push_back(jo);
        }
        j["outcomes"] = outs;
    }
    if (!spec.baselines_file.empty()) j["baselines"] = spec.baselines_file;
    if (!spec.mock_policy.is_null()) j["mock"] = spec.mock_policy;
    return j;
}

inline ExperimentSpec spec_from_json(const json& j) {
    ExperimentSpec spec;
    spec.name = j.at("name").get<std::string>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    if (j.contains("persona_arm")) {
        const auto arm = j.at("persona_arm").get<std::string>();
        if (arm == "persona") spec.persona_arm = PersonaArm::persona;
        else if (arm == "no-persona") spec.persona_arm = PersonaArm::no_persona;
        else if (arm == "both") spec.persona_arm = PersonaArm::both;
        else throw std::invalid_argument("unknown persona_arm \"" + arm + "\"");
    }
    if (j.contains("shuffle_questions")) spec.shuffle_questions = j.at("shuffle_questions").get<bool>();
    spec.model_ids = j.at("models").get<std::vector<std::string>>();
    if (j.contains("factors")) {
        for (const auto& jf : j.at("factors")) {
            Factor f;
            f.name = jf.at("name").get<std::string>();
            const auto role = jf.at("role").get<std::string>();
            if (role == "within") f.role = FactorRole::within_subject;
            else if (role == "between") f.role = FactorRole::between_subject;
            else throw std::invalid_argument("factor \"" + f.name + "\": unknown role \"" + role + "\"");
            for (const auto& jl : jf.at("levels")) {
                FactorLevel l;
                if (jl.is_string()) {
                    l.label = jl.get<std::string>();
                    l.text = l.label;
                } else {
                    l.label = jl.at("label").get<std::string>();
                    l.text = jl.contains("text") ? jl.at("text").get<std::string>() : l.label;
                }
                f.levels.push_back(std::move(l));
            }
            f.validate();
            spec.factors.push_back(std::move(f));
        }
    }
    for (const auto& jq : j.at("questions")) {
        QuestionItem q;
        q.id = jq.at("id").get<std::string>();
        q.prompt = jq.at("prompt").get<std::string>();
        const auto kind = jq.at("kind").get<std::string>();
        if (kind == "binary-verdict") {
            q.kind = AnswerKind::binary_verdict;
            q.lo = 0;
            q.hi = 1;
        } else if (kind == "integer-scale") {
            q.kind = AnswerKind::integer_scale;
            q.lo = jq.at("lo").get<int>();
            q.hi = jq.at("hi").get<int>();
        } else {
            throw std::invalid_argument("question \"" + q.id + "\": unknown kind \"" + kind + "\"");
        }
        if (jq.contains("scale_meaning")) q.scale_meaning = jq.at("scale_meaning").get<std::string>();
        if (jq.contains("positive_terms"))
            q.positive_terms = jq.at("positive_terms").get<std::vector<std::string>>();
        if (jq.contains("negative_terms"))
            q.negative_terms = jq.at("negative_terms").get<std::vector<std::string>>();
        q.validate();
        spec.questions.push_back(std::move(q));
    }
    for (const auto& jv : j.at("vignettes")) {
        Vignette v;
        v.id = jv.at("id").get<std::string>();
        v.body_template = jv.at("body_template").get<std::string>();
        v.question_ids = jv.at("questions").get<std::vector<std::string>>();
        spec.vignettes.push_back(std::move(v));
    }
    if (j.contains("population")) {
        const auto& jp = j.at("population");
        if (jp.contains("file")) spec.population.file = jp.at("file").get<std::string>();
        if (jp.contains("demographics"))
            spec.population.demographics =
                population::demographic_spec_from_json(jp.at("demographics"));
        if (jp.contains("n")) spec.population.n = jp.at("n").get<std::size_t>();
    }
    if (j.contains("persona_template"))
        spec.persona_template = j.at("persona_template").get<std::string>();
    if (j.contains("response_instruction"))
        spec.response_instruction = j.at("response_instruction").get<std::string>();
    if (j.contains("outcomes")) {
        for (const auto& jo : j.at("outcomes")) {
            OutcomeDef o;
            o.id = jo.at("id").get<std::string>();
            const auto kind = jo.at("kind").get<std::string>();
            if (kind == "question") {
                o.kind = OutcomeDef::Kind::question;
                o.question = jo.at("question").get<std::string>();
            } else if (kind == "composite-negligence") {
                o.kind = OutcomeDef::Kind::composite_negligence;
                o.verdict_question = jo.at("verdict_question").get<std::string>();
                o.confidence_question = jo.at("confidence_question").get<std::string>();
            } else {
                throw std::invalid_argument("outcome \"" + o.id + "\": unknown kind \"" + kind + "\"");
            }
            spec.outcomes.push_back(std::move(o));
        }
    }
    if (j.contains("baselines")) spec.baselines_file = j.at("baselines").get<std::string>();
    if (j.contains("mock")) spec.mock_policy = j.at("mock");
    spec.validate();
    return spec;
}

inline ExperimentSpec load_experiment_spec(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw std::invalid_argument(path + ": invalid JSON: " + e.what());
    }
    try {
        return spec_from_json(j);
    } catch (const std::exception& e) {
        throw std::invalid_argument(path + ": " + e.what());
    }
}

}  // namespace srct::design
