#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include "srct/population.hpp"

namespace pop = srct::population;
namespace fs = std::filesystem;

namespace {

pop::DemographicSpec make_spec(std::uint64_t seed = 17) {
    pop::DemographicSpec spec;
    spec.seed = seed;
    spec.marginals["gender"] = {{{"female", 0.5}, {"male", 0.5}}};
    spec.marginals["race"] = {
        {{"White", 0.68}, {"Hispanic", 0.13}, {"Black", 0.08}, {"Asian", 0.05}, {"Other", 0.06}}};
    spec.marginals["political_lean"] = {
        {{"lean Democrat", 0.30}, {"lean Republican", 0.29}, {"independent", 0.27}, {"other", 0.14}}};
    spec.marginals["education"] = {{{"a high school", 0.31},
                                    {"some college", 0.24},
                                    {"a bachelor's degree", 0.20},
                                    {"a graduate degree", 0.12},
                                    {"less than high school", 0.13}}};
    spec.marginals["income_bracket"] = {{{"under $25K", 0.16},
                                         {"$25K-$50K", 0.20},
                                         {"$50K-$75K", 0.17},
                                         {"$75K-$150K", 0.30},
                                         {"over $150K", 0.17}}};
    spec.marginals["employment"] = {{{"employed", 0.58},
                                     {"unemployed", 0.05},
                                     {"retired", 0.19},
                                     {"a student", 0.06},
                                     {"out of the labor force", 0.12}}};
    spec.marginals["homeownership"] = {{{"a homeowner", 0.65}, {"a renter", 0.35}}};
    spec.marginals["religion"] = {{{"Protestant", 0.26},
                                   {"Catholic", 0.21},
                                   {"Mainline Protestant", 0.15},
                                   {"unaffiliated", 0.23},
                                   {"Jewish", 0.02},
                                   {"Muslim", 0.01},
                                   {"another faith", 0.12}}};
    spec.marginals["marital_status"] = {
        {{"married", 0.50}, {"never married", 0.29}, {"divorced", 0.13}, {"widowed", 0.08}}};
    return spec;
}

fs::path temp_file(const std::string& name) {
    return fs::temp_directory_path() / ("srct_poptest_" + name);
}

}  // namespace

TEST_CASE("degenerate marginal yields that category for everyone") {
    pop::DemographicSpec spec;
    spec.seed = 1;
    spec.marginals["gender"] = {{{"female", 1.0}}};
    const auto personas = pop::sample_population(spec, 3);
    REQUIRE(personas.size() == 3);
    for (const auto& p : personas) CHECK(p.gender == "female");
}

TEST_CASE("non-normalized marginal is rejected naming the attribute") {
    pop::DemographicSpec spec;
    spec.marginals["race"] = {{{"White", 0.6}, {"Black", 0.3}}};
    try {
        pop::sample_population(spec, 5);
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("race") != std::string::npos);
    }
}

TEST_CASE("n must be positive") {
    CHECK_THROWS_AS(pop::sample_population(make_spec(), 0), std::invalid_argument);
}

TEST_CASE("sampling is deterministic for fixed spec, n, seed") {
    const auto spec = make_spec(99);
    const auto a = pop::sample_population(spec, 50);
    const auto b = pop::sample_population(spec, 50);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(pop::to_json(a[i]).dump() == pop::to_json(b[i]).dump());
    }
    const auto c = pop::sample_population(make_spec(100), 50);
    bool any_diff = false;
    for (std::size_t i = 0; i < a.size(); ++i)
        if (pop::to_json(a[i]).dump() != pop::to_json(c[i]).dump()) any_diff = true;
    CHECK(any_diff);
}

TEST_CASE("realized white proportion at n=10,000 sits in the exact binomial 99.9% interval") {
    // Oracle: central 99.9% interval of Binomial(10000, 0.68) is [6646, 6953]
    // counts, i.e. the realized proportion lies within +-1.5 points of 68%.
    const auto personas = pop::sample_population(make_spec(2024), 10000);
    std::size_t white = 0;
    for (const auto& p : personas)
        if (p.race == "White") ++white;
    CHECK(white >= 6646);
    CHECK(white <= 6953);
}

TEST_CASE("persona invariants hold across a large sample") {
    const auto personas = pop::sample_population(make_spec(5), 2000);
    std::map<std::string, int> ids;
    for (const auto& p : personas) {
        CHECK(p.age >= 18);
        CHECK(p.age <= 100);
        CHECK(p.iq >= 55);
        CHECK(p.iq <= 145);
        CHECK(!p.name.empty());
        CHECK(!p.personality_text.empty());
        ids[p.id]++;
    }
    CHECK(ids.size() == personas.size());
}

TEST_CASE("age distribution tracks the fitted mean and median") {
    const auto personas = pop::sample_population(make_spec(31), 10000);
    double sum = 0.0;
    std::vector<int> ages;
    for (const auto& p : personas) {
        sum += p.age;
        ages.push_back(p.age);
    }
    std::sort(ages.begin(), ages.end());
    const double mean = sum / personas.size();
    const double median = ages[ages.size() / 2];
    CHECK(mean == Catch::Approx(46.0).margin(1.5));
    CHECK(median == Catch::Approx(43.0).margin(1.5));
}

TEST_CASE("preamble rendering substitutes every slot") {
    pop::Persona p;
    p.id = "p1";
    p.name = "Mart Alvarez";
    p.age = 61;
    p.race = "Hispanic";
    p.gender = "woman";
    const std::string tmpl =
        "You are roleplaying as {name}. {name} is a {age} year old {race} {gender}.";
    CHECK(pop::render_persona_preamble(p, tmpl) ==
          "You are roleplaying as Mart Alvarez. Mart Alvarez is a 61 year old Hispanic woman.");
}

TEST_CASE("preamble rendering: zero-slot template is returned verbatim") {
    pop::Persona p;
    const std::string tmpl = "From here on out, you will be roleplaying this character.";
    CHECK(pop::render_persona_preamble(p, tmpl) == tmpl);
}

TEST_CASE("preamble rendering rejects unknown slots by name") {
    pop::Persona p;
    try {
        pop::render_persona_preamble(p, "My shoe size is {shoe_size}.");
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("shoe_size") != std::string::npos);
    }
}

TEST_CASE("rendered output never contains an unresolved slot marker") {
    const auto personas = pop::sample_population(make_spec(8), 25);
    const std::string tmpl =
        "You are roleplaying as {name}. {name} is a {age} year old {race} {gender}. "
        "Politically, they are {political_lean}. Personality description: {personality_text} "
        "From here on out, you will be roleplaying this character, answering from their own "
        "perspective, not your own. Simulate their knowledge, values, and beliefs.";
    for (const auto& p : personas) {
        const auto text = pop::render_persona_preamble(p, tmpl);
        for (const auto& slot : {"{name}", "{age}", "{race}", "{gender}", "{political_lean}",
                                 "{personality_text}"}) {
            CHECK(text.find(slot) == std::string::npos);
        }
    }
}

TEST_CASE("save then load round-trips a sampled population") {
    const auto personas = pop::sample_population(make_spec(12), 40);
    const auto path = temp_file("roundtrip.jsonl");
    pop::save_population(path.string(), personas);
    const auto loaded = pop::load_population(path.string());
    REQUIRE(loaded.size() == personas.size());
    for (std::size_t i = 0; i < personas.size(); ++i)
        CHECK(pop::to_json(loaded[i]).dump() == pop::to_json(personas[i]).dump());
    fs::remove(path);
}

TEST_CASE("load accepts a whole-file JSON array layout") {
    const auto personas = pop::sample_population(make_spec(13), 3);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& p : personas) arr.push_back(pop::to_json(p));
    const auto path = temp_file("array.json");
    std::ofstream(path) << arr.dump(2);
    const auto loaded = pop::load_population(path.string());
    CHECK(loaded.size() == 3);
    fs::remove(path);
}

TEST_CASE("load rejects an out-of-range age naming the field and record") {
    const auto personas = pop::sample_population(make_spec(14), 2);
    auto j0 = pop::to_json(personas[0]);
    auto j1 = pop::to_json(personas[1]);
    j1["age"] = 17;
    const auto path = temp_file("badage.jsonl");
    std::ofstream(path) << j0.dump() << '\n' << j1.dump() << '\n';
    try {
        pop::load_population(path.string());
        FAIL("expected rejection");
    } catch (const std::invalid_argument& e) {
        const std::string msg = e.what();
        CHECK(msg.find("age") != std::string::npos);
        CHECK(msg.find("record 1") != std::string::npos);
    }
    fs::remove(path);
}

TEST_CASE("load rejects malformed records with the record index") {
    const auto path = temp_file("malformed.jsonl");
    std::ofstream(path) << "{not json\n";
    CHECK_THROWS(pop::load_population(path.string()));
    fs::remove(path);
}

TEST_CASE("load rejects duplicate ids") {
    const auto personas = pop::sample_population(make_spec(15), 1);
    const auto j = pop::to_json(personas[0]);
    const auto path = temp_file("dupid.jsonl");
    std::ofstream(path) << j.dump() << '\n' << j.dump() << '\n';
    CHECK_THROWS_AS(pop::load_population(path.string()), std::invalid_argument);
    fs::remove(path);
}

TEST_CASE("validate_marginals: self-sampled population passes at 2% tolerance") {
    // Oracle: by Hoeffding, each category deviates by more than 0.02 with
    // probability <= 2 exp(-2 * 10000 * 0.0004); with a fixed seed the check
    // is deterministic.
    const auto spec = make_spec(77);
    const auto personas = pop::sample_population(spec, 10000);
    const auto report = pop::validate_marginals(personas, spec, 0.02);
    CHECK(report.all_pass);
}

TEST_CASE("validate_marginals: an all-female population against a 50/50 target fails") {
    pop::DemographicSpec spec;
    spec.seed = 3;
    spec.marginals["gender"] = {{{"female", 0.5}, {"male", 0.5}}};
    pop::DemographicSpec allf = spec;
    allf.marginals["gender"] = {{{"female", 1.0}}};
    const auto personas = pop::sample_population(allf, 100);
    const auto report = pop::validate_marginals(personas, spec, 0.1);
    REQUIRE(report.attributes.size() == 1);
    CHECK_FALSE(report.all_pass);
    bool found = false;
    for (const auto& dev : report.attributes[0].categories) {
        if (dev.category == "female") {
            CHECK(dev.deviation == Catch::Approx(0.5));
            found = true;
        }
    }
    CHECK(found);
}

TEST_CASE("validate_marginals: tolerance 1.0 always passes") {
    const auto spec = make_spec(4);
    pop::DemographicSpec skewed = spec;
    skewed.marginals["gender"] = {{{"female", 1.0}}};
    const auto personas = pop::sample_population(skewed, 20);
    CHECK(pop::validate_marginals(personas, spec, 1.0).all_pass);
}

TEST_CASE("demographic spec JSON parsing enforces invariants") {
    nlohmann::ordered_json j;
    j["seed"] = 9;
    j["age"] = {{"mean", 46.0}, {"median", 43.0}, {"min", 17}, {"max", 100}};
    j["marginals"]["gender"] = {{"female", 0.5}, {"male", 0.5}};
    CHECK_THROWS_AS(pop::demographic_spec_from_json(j), std::invalid_argument);
    j["age"]["min"] = 18;
    CHECK_NOTHROW(pop::demographic_spec_from_json(j));
}
