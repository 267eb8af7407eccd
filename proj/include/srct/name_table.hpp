#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <string>
#include <string_view>
#include <vector>

namespace srct::population {

// Bundled name data keyed by gender and race category. Demographically
// typical names make roleplay prompts more effective, so the pools are
// kept per group; an unknown group falls back to a generic pool.
namespace name_table {

struct FirstNamePool {
    std::string_view gender;
    std::string_view race;
    std::array<std::string_view, 12> names;
};

struct LastNamePool {
    std::string_view race;
    std::array<std::string_view, 12> names;
};

inline const std::vector<FirstNamePool>& first_name_pools() {
    static const std::vector<FirstNamePool> pools = {
        {"female", "white",
         {"Margaret", "Susan", "Linda", "Karen", "Emily", "Sarah", "Donna", "Laura", "Rachel",
          "Heather", "Janet", "Carol"}},
        {"male", "white",
         {"James", "Robert", "William", "David", "Thomas", "Mark", "Steven", "Paul", "Kenneth",
          "Brian", "Edward", "Scott"}},
        {"female", "hispanic",
         {"Maria", "Carmen", "Rosa", "Ana", "Isabella", "Lucia", "Elena", "Gabriela", "Marta",
          "Sofia", "Teresa", "Veronica"}},
        {"male", "hispanic",
         {"Jose", "Juan", "Carlos", "Luis", "Miguel", "Jorge", "Pedro", "Rafael", "Diego",
          "Hector", "Manuel", "Ricardo"}},
        {"female", "black",
         {"Keisha", "Tanya", "Latoya", "Denise", "Angela", "Monique", "Alicia", "Yolanda",
          "Ebony", "Danielle", "Renee", "Patrice"}},
        {"male", "black",
         {"Darnell", "Marcus", "Terrence", "Jamal", "Andre", "Reginald", "Malik", "Tyrone",
          "Darius", "Cedric", "Kareem", "Lamar"}},
        {"female", "asian",
         {"Mei", "Yuki", "Priya", "Linh", "Soo-Jin", "Akiko", "Wei", "Anjali", "Hana", "Jia",
          "Thuy", "Mina"}},
        {"male", "asian",
         {"Hiroshi", "Wei", "Raj", "Minh", "Jin", "Kenji", "Arjun", "Sanjay", "Takeshi",
          "Chen", "Dae-Ho", "Vikram"}},
        {"female", "other",
         {"Aaliyah", "Noa", "Sofia", "Amara", "Leilani", "Zara", "Nadia", "Kiana", "Amina",
          "Talia", "Mariam", "Selena"}},
        {"male", "other",
         {"Omar", "Kai", "Elias", "Mateo", "Samir", "Nikolai", "Ravi", "Tariq", "Dakota",
          "Amir", "Levi", "Cruz"}},
    };
    return pools;
}

inline const std::vector<LastNamePool>& last_name_pools() {
    static const std::vector<LastNamePool> pools = {
        {"white",
         {"Smith", "Johnson", "Miller", "Davis", "Wilson", "Anderson", "Taylor", "Thompson",
          "White", "Clark", "Walker", "Hall"}},
        {"hispanic",
         {"Garcia", "Rodriguez", "Martinez", "Hernandez", "Lopez", "Gonzalez", "Perez",
          "Sanchez", "Ramirez", "Torres", "Alvarez", "Flores"}},
        {"black",
         {"Williams", "Brown", "Jackson", "Harris", "Robinson", "Lewis", "Coleman", "Simmons",
          "Washington", "Brooks", "Jenkins", "Gaines"}},
        {"asian",
         {"Nguyen", "Kim", "Chen", "Patel", "Tran", "Wang", "Park", "Tanaka", "Singh", "Li",
          "Yamamoto", "Sato"}},
        {"other",
         {"Begay", "Haddad", "Kahale", "Okafor", "Petrov", "Rosales", "Santos", "Achebe",
          "Nakai", "Demir", "Abadi", "Youssef"}},
    };
    return pools;
}

inline std::string normalize_key(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    for (char c : s) out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

inline const std::array<std::string_view, 12>& first_names_for(std::string_view gender,
                                                               std::string_view race) {
    const std::string g = normalize_key(gender);
    const std::string r = normalize_key(race);
    for (const auto& pool : first_name_pools()) {
        if (pool.gender == g && pool.race == r) return pool.names;
    }
    // Fallback: match on gender alone, else the first pool.
    for (const auto& pool : first_name_pools()) {
        if (pool.gender == g && pool.race == "other") return pool.names;
    }
    return first_name_pools().front().names;
}

inline const std::array<std::string_view, 12>& last_names_for(std::string_view race) {
    const std::string r = normalize_key(race);
    for (const auto& pool : last_name_pools()) {
        if (pool.race == r) return pool.names;
    }
    return last_name_pools().back().names;
}

}  // namespace name_table

}  // namespace srct::population
