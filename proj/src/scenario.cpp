#include "priorlens/scenario.hpp"

#include <fstream>

#include <nlohmann/json.hpp>

#include "priorlens/errors.hpp"

namespace priorlens {

namespace {

const std::string kPreamble =
    "Each of the questions below asks you to predict something, either a duration or "
    "a quantity, based on a single piece of information. Please read each question "
    "and respond only with your prediction on the line below it. We're interested in "
    "your intuitions, so please don't make complicated calculations; just tell us "
    "what you think! ";

const std::string kGrossesBody =
    "Imagine you hear about a movie that has taken in {t} million dollars at the box "
    "office, but don't know how long it has been running. What would you predict for "
    "the total amount of box office intake for that movie? "
    "Predicted_number_of_million_dollars=";

std::vector<ScenarioDef> make_builtins() {
    std::vector<ScenarioDef> defs;
    defs.push_back({"cakes",
                    kPreamble +
                        "Imagine you are in somebody's kitchen and notice that a cake is in "
                        "the oven. The timer shows that it has been baking for {t} minutes. "
                        "What would you predict for the total amount of times the cake "
                        "needs to bake? Predicted_number_of_minutes=",
                    10, 70, 1, "Predicted_number_of_minutes=", "minutes", false});
    defs.push_back({"lifespans", kPreamble + kGrossesBody, 1, 100, 1,
                    "Predicted_number_of_million_dollars=", "million dollars", true});
    defs.push_back({"movie_grosses", kPreamble + kGrossesBody, 1, 100, 1,
                    "Predicted_number_of_million_dollars=", "million dollars", false});
    defs.push_back({"movie_runtimes",
                    kPreamble +
                        "If you made a surprise visit to a friend, and found that they had "
                        "been watching a movie for {t} minutes, what would you predict for "
                        "the length of the movie? Predicted_number_of_minutes=",
                    30, 110, 1, "Predicted_number_of_minutes=", "minutes", false});
    defs.push_back({"poem",
                    kPreamble +
                        "If your friend read you her favorite line of poetry, and told you "
                        "it was line {t} of a poem, what would you predict for the total "
                        "length of the poem? Predicted_number_of_lines=",
                    2, 67, 1, "Predicted_number_of_lines=", "lines", false});
    defs.push_back({"pharaohs",
                    kPreamble +
                        "If you opened a book about the history of ancient Egypt to a page "
                        "listing the reigns of the pharaohs, and noticed that at 4000 BC a "
                        "particular pharaoh had been ruling for {t} years, what would you "
                        "predict for the total duration of his reign? "
                        "Predicted_number_of_years=",
                    1, 23, 1, "Predicted_number_of_years=", "years", false});
    defs.push_back({"representatives",
                    kPreamble +
                        "If you heard a member of the U.S. House of Representative had "
                        "served for {t} years, what would you predict his total in the "
                        "House would be? Predicted_number_of_years=",
                    1, 31, 1, "Predicted_number_of_years=", "years", false});
    defs.push_back({"waiting_times",
                    kPreamble +
                        "If you were calling a telephone box office to book tickets and had "
                        "been on hold for {t} minutes, what would you predict for the total "
                        "time you would be on hold? Predicted_number_of_minutes=",
                    1, 23, 1, "Predicted_number_of_minutes=", "minutes", false});
    for (const auto& d : defs) validate(d);
    return defs;
}

} // namespace

void validate(const ScenarioDef& scenario) {
    if (scenario.id.empty()) throw DomainError("scenario id must be nonempty");
    const auto first = scenario.prompt_template.find("{t}");
    if (first == std::string::npos ||
        scenario.prompt_template.find("{t}", first + 1) != std::string::npos)
        throw DomainError("scenario '" + scenario.id +
                          "': prompt template must contain exactly one {t}");
    if (scenario.t_min > scenario.t_max)
        throw DomainError("scenario '" + scenario.id + "': t_min must not exceed t_max");
    if (scenario.t_min <= 0)
        throw DomainError("scenario '" + scenario.id + "': t values must be positive");
    if (scenario.t_step < 1)
        throw DomainError("scenario '" + scenario.id + "': t_step must be at least 1");
    if (scenario.answer_marker.empty())
        throw DomainError("scenario '" + scenario.id + "': answer marker must be nonempty");
}

const std::vector<ScenarioDef>& builtin_scenarios() {
    static const std::vector<ScenarioDef> defs = make_builtins();
    return defs;
}

const ScenarioDef* find_scenario(std::span<const ScenarioDef> scenarios,
                                 std::string_view id) {
    for (const auto& s : scenarios)
        if (s.id == id) return &s;
    return nullptr;
}

std::vector<ScenarioDef> load_scenarios(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw IoError("cannot open scenario file: " + file.string());
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw FormatError("scenario file " + file.string() + ": " + e.what());
    }
    const nlohmann::json* arr = &doc;
    if (doc.is_object() && doc.contains("scenarios")) arr = &doc["scenarios"];
    if (!arr->is_array())
        throw FormatError("scenario file must hold an array of scenario objects");

    std::vector<ScenarioDef> defs = builtin_scenarios();
    for (const auto& item : *arr) {
        try {
            ScenarioDef s;
            s.id = item.at("id").get<std::string>();
            s.prompt_template = item.at("prompt_template").get<std::string>();
            s.t_min = item.at("t_min").get<int>();
            s.t_max = item.at("t_max").get<int>();
            s.t_step = item.value("t_step", 1);
            s.answer_marker = item.at("answer_marker").get<std::string>();
            s.units = item.value("units", std::string{});
            s.non_canonical = item.value("non_canonical", false);
            validate(s);
            bool replaced = false;
            for (auto& existing : defs)
                if (existing.id == s.id) {
                    existing = s;
                    replaced = true;
                    break;
                }
            if (!replaced) defs.push_back(std::move(s));
        } catch (const nlohmann::json::exception& e) {
            throw FormatError("scenario file " + file.string() + ": " + e.what());
        }
    }
    return defs;
}

std::string render_prompt(const ScenarioDef& scenario, int t) {
    validate(scenario);
    if (t < scenario.t_min || t > scenario.t_max)
        throw RangeError("t=" + std::to_string(t) + " outside [" +
                         std::to_string(scenario.t_min) + ", " +
                         std::to_string(scenario.t_max) + "] for scenario '" +
                         scenario.id + "'");
    std::string out = scenario.prompt_template;
    out.replace(out.find("{t}"), 3, std::to_string(t));
    return out;
}

std::vector<int> t_grid(const ScenarioDef& scenario) {
    std::vector<int> grid;
    for (int t = scenario.t_min; t <= scenario.t_max; t += scenario.t_step)
        grid.push_back(t);
    return grid;
}

} // namespace priorlens
