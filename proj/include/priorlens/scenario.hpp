#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace priorlens {

// One elicitation scenario: a prompt template with a single {t} placeholder,
// the integer grid of t values to sweep, and the marker the answer is read
// after.
struct ScenarioDef {
    std::string id;
    std::string prompt_template;
    int t_min = 1;
    int t_max = 1;
    int t_step = 1;
    std::string answer_marker;
    std::string units;
    // The shipped lifespans prompt repeats the movie-grosses wording; it is
    // kept verbatim and flagged so callers can substitute a corrected one.
    bool non_canonical = false;
};

void validate(const ScenarioDef& scenario);

/// The eight built-in scenarios: cakes, lifespans, movie_grosses,
/// movie_runtimes, poem, pharaohs, representatives, waiting_times.
const std::vector<ScenarioDef>& builtin_scenarios();

const ScenarioDef* find_scenario(std::span<const ScenarioDef> scenarios,
                                 std::string_view id);

/// Built-ins overlaid with definitions from a JSON file (an array of
/// scenario objects, or {"scenarios": [...]}); file entries replace
/// built-ins with the same id.
std::vector<ScenarioDef> load_scenarios(const std::filesystem::path& file);

/// The template with {t} replaced by the decimal rendering of t; byte-exact
/// otherwise. t must lie in [t_min, t_max].
std::string render_prompt(const ScenarioDef& scenario, int t);

std::vector<int> t_grid(const ScenarioDef& scenario);

} // namespace priorlens
